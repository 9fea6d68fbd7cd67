//! Radau IIA collocation abscissae, quadrature weights and Lagrange
//! differentiation matrices on the unit element [0, 1].

use thiserror::Error;

use crate::util::linalg::lu_solve;

#[derive(Error, Debug)]
pub enum CollocationError {
    #[error("unsupported collocation degree {0} (supported: 1..=5)")]
    UnsupportedDegree(usize),
    #[error("collocation points must be distinct and lie in (0, 1]")]
    InvalidPoints,
    #[error("grid misaligned: {0}")]
    MisalignedGrid(String),
    #[error("layout mismatch: {0}")]
    Layout(String),
}

/// Legendre polynomial `P_n` and its derivative at `x` (recurrence).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // derivative from P_n and P_{n-1}
    let dp = if (x * x - 1.0).abs() < 1e-14 {
        // limit value at the endpoints
        let nf = n as f64;
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        sign * nf * (nf + 1.0) / 2.0
    } else {
        (n as f64) * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// Residual whose roots on (0, 1] are the Radau IIA abscissae of degree
/// `d`: `P_d(2t - 1) - P_{d-1}(2t - 1)`.
fn radau_residual(d: usize, t: f64) -> (f64, f64) {
    let x = 2.0 * t - 1.0;
    let (pd, dpd) = legendre(d, x);
    let (pdm, dpdm) = legendre(d - 1, x);
    (pd - pdm, 2.0 * (dpd - dpdm))
}

/// Radau IIA collocation points of degree `d` in (0, 1], last point
/// exactly 1. Quadrature built on them is exact through degree `2d - 2`.
pub fn radau_points(d: usize) -> Result<Vec<f64>, CollocationError> {
    if d < 1 || d > 5 {
        return Err(CollocationError::UnsupportedDegree(d));
    }
    // t = 1 is always a root; locate the d-1 interior roots by bracketed
    // bisection plus Newton polish.
    let mut points = Vec::with_capacity(d);
    let samples = 4096;
    let mut prev_t = 1e-9;
    let mut prev_f = radau_residual(d, prev_t).0;
    for i in 1..samples {
        let t = i as f64 / samples as f64;
        if t >= 1.0 - 1e-9 {
            break;
        }
        let f = radau_residual(d, t).0;
        if prev_f == 0.0 {
            points.push(prev_t);
        } else if prev_f * f < 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            let mut flo = prev_f;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = radau_residual(d, mid).0;
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            let mut root = 0.5 * (lo + hi);
            for _ in 0..4 {
                let (f, df) = radau_residual(d, root);
                if df != 0.0 {
                    root -= f / df;
                }
            }
            points.push(root);
        }
        prev_t = t;
        prev_f = f;
    }
    points.push(1.0);
    debug_assert_eq!(points.len(), d, "expected {d} Radau points");
    Ok(points)
}

/// Quadrature weights over [0, 1] for the given abscissae, from the moment
/// equations `sum_k w_k c_k^q = 1 / (q + 1)`.
pub fn quadrature_weights(points: &[f64]) -> Result<Vec<f64>, CollocationError> {
    let d = points.len();
    check_points(points)?;
    let mut vandermonde: Vec<Vec<f64>> = (0..d)
        .map(|q| points.iter().map(|&c| c.powi(q as i32)).collect())
        .collect();
    let mut rhs: Vec<f64> = (0..d).map(|q| 1.0 / (q as f64 + 1.0)).collect();
    lu_solve(&mut vandermonde, &mut rhs).ok_or(CollocationError::InvalidPoints)?;
    Ok(rhs)
}

fn check_points(points: &[f64]) -> Result<(), CollocationError> {
    if points.is_empty() {
        return Err(CollocationError::InvalidPoints);
    }
    for (i, &p) in points.iter().enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(CollocationError::InvalidPoints);
        }
        for &q in &points[..i] {
            if (p - q).abs() < 1e-12 {
                return Err(CollocationError::InvalidPoints);
            }
        }
    }
    Ok(())
}

/// Derivatives of the Lagrange basis over the nodes `{0} ∪ points`,
/// evaluated at the collocation points.
///
/// Entry `[j][k]` is `dL_j/dt (points[k])` for node index `j = 0..=d`
/// (node 0 is the element start) and collocation index `k = 0..d`. For a
/// state polynomial with values `X_j` at the nodes, the interpolant's
/// derivative at `points[k]` is `sum_j m[j][k] * X_j`.
pub fn differentiation_matrix(points: &[f64]) -> Result<Vec<Vec<f64>>, CollocationError> {
    check_points(points)?;
    let d = points.len();
    let mut nodes = Vec::with_capacity(d + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(points);

    // barycentric weights
    let mut bary = vec![1.0; d + 1];
    for j in 0..=d {
        for m in 0..=d {
            if m != j {
                bary[j] /= nodes[j] - nodes[m];
            }
        }
    }

    let mut mat = vec![vec![0.0; d]; d + 1];
    for k in 0..d {
        let i = k + 1; // node index of collocation point k
        let mut diag = 0.0;
        for j in 0..=d {
            if j != i {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                mat[j][k] = v;
                diag -= v;
            }
        }
        mat[i][k] = diag;
    }
    Ok(mat)
}

/// Values of the Lagrange basis over nodes `{0} ∪ points` at an arbitrary
/// normalized time `t` in [0, 1]; used for trajectory interpolation.
pub fn lagrange_basis_at(points: &[f64], t: f64) -> Vec<f64> {
    let d = points.len();
    let mut nodes = Vec::with_capacity(d + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(points);
    let mut vals = vec![1.0; d + 1];
    for j in 0..=d {
        for m in 0..=d {
            if m != j {
                vals[j] *= (t - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
    }
    vals
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent root oracle: pure bisection on the Radau residual over a
    /// fine sign-change scan, no Newton polish shared with the
    /// implementation path.
    fn bisection_oracle(d: usize) -> Vec<f64> {
        let f = |t: f64| {
            let x = 2.0 * t - 1.0;
            // direct Legendre evaluation by explicit summation of the
            // recurrence, kept separate from `legendre`
            let poly = |n: usize| -> f64 {
                let (mut a, mut b) = (1.0, x);
                if n == 0 {
                    return a;
                }
                for k in 1..n {
                    let kf = k as f64;
                    let c = ((2.0 * kf + 1.0) * x * b - kf * a) / (kf + 1.0);
                    a = b;
                    b = c;
                }
                b
            };
            poly(d) - poly(d - 1)
        };
        let mut roots = Vec::new();
        let n = 200_000;
        let mut prev = (1e-12, f(1e-12));
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let ft = f(t);
            if prev.1 * ft < 0.0 {
                let (mut lo, mut hi, mut flo) = (prev.0, t, prev.1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = (t, ft);
        }
        roots.push(1.0);
        roots
    }

    #[test]
    fn degree_one_is_implicit_euler() {
        assert_eq!(radau_points(1).unwrap(), vec![1.0]);
    }

    #[test]
    fn degree_two_matches_bisection_oracle_and_closed_form() {
        let pts = radau_points(2).unwrap();
        let oracle = bisection_oracle(2);
        assert_eq!(pts.len(), 2);
        for (p, o) in pts.iter().zip(&oracle) {
            assert!((p - o).abs() < 1e-14, "{p} vs oracle {o}");
        }
        assert!((pts[0] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(pts[1], 1.0);
    }

    #[test]
    fn degree_three_matches_bisection_oracle_and_closed_form() {
        let pts = radau_points(3).unwrap();
        let oracle = bisection_oracle(3);
        for (p, o) in pts.iter().zip(&oracle) {
            assert!((p - o).abs() < 1e-14, "{p} vs oracle {o}");
        }
        let s6 = 6.0f64.sqrt();
        assert!((pts[0] - (4.0 - s6) / 10.0).abs() < 1e-14);
        assert!((pts[1] - (4.0 + s6) / 10.0).abs() < 1e-14);
        assert_eq!(pts[2], 1.0);
    }

    #[test]
    fn degrees_four_and_five_match_bisection_oracle() {
        for d in [4, 5] {
            let pts = radau_points(d).unwrap();
            let oracle = bisection_oracle(d);
            assert_eq!(pts.len(), d);
            for (p, o) in pts.iter().zip(&oracle) {
                assert!((p - o).abs() < 1e-12, "d={d}: {p} vs oracle {o}");
            }
        }
    }

    #[test]
    fn unsupported_degree_is_rejected() {
        assert!(matches!(radau_points(0), Err(CollocationError::UnsupportedDegree(0))));
        assert!(matches!(radau_points(6), Err(CollocationError::UnsupportedDegree(6))));
    }

    #[test]
    fn quadrature_exact_up_to_degree_2d_minus_2() {
        for d in 1..=5usize {
            let pts = radau_points(d).unwrap();
            let w = quadrature_weights(&pts).unwrap();
            for q in 0..=(2 * d - 2) {
                let integral: f64 =
                    w.iter().zip(&pts).map(|(wi, ci)| wi * ci.powi(q as i32)).sum();
                let exact = 1.0 / (q as f64 + 1.0);
                assert!(
                    (integral - exact).abs() <= 1e-12,
                    "d={d} monomial t^{q}: {integral} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn differentiation_matrix_exact_on_polynomials() {
        // constants differentiate to zero
        let pts = radau_points(2).unwrap();
        let m = differentiation_matrix(&pts).unwrap();
        for k in 0..2 {
            let deriv: f64 = (0..3).map(|j| m[j][k] * 5.0).sum();
            assert!(deriv.abs() < 1e-12);
        }
        // p(t) = t has derivative 1 at both points
        for k in 0..2 {
            let nodes = [0.0, pts[0], pts[1]];
            let deriv: f64 = (0..3).map(|j| m[j][k] * nodes[j]).sum();
            assert!((deriv - 1.0).abs() < 1e-12);
        }
        // p(t) = t^3 on the d = 3 grid reproduces 3 t^2
        let pts3 = radau_points(3).unwrap();
        let m3 = differentiation_matrix(&pts3).unwrap();
        let nodes: Vec<f64> = std::iter::once(0.0).chain(pts3.iter().copied()).collect();
        for k in 0..3 {
            let deriv: f64 = (0..4).map(|j| m3[j][k] * nodes[j].powi(3)).sum();
            let exact = 3.0 * pts3[k] * pts3[k];
            assert!((deriv - exact).abs() < 1e-12, "{deriv} vs {exact}");
        }
    }

    #[test]
    fn duplicate_points_are_rejected() {
        assert!(differentiation_matrix(&[0.5, 0.5]).is_err());
        assert!(quadrature_weights(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn lagrange_basis_partition_of_unity() {
        let pts = radau_points(3).unwrap();
        for &t in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            let basis = lagrange_basis_at(&pts, t);
            let sum: f64 = basis.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
