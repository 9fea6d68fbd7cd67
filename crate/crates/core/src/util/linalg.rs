//! Small dense linear algebra: LU with partial pivoting.
//!
//! Sized for the Newton systems of this crate (tens of unknowns); the NLP
//! layer has its own sparse factorization.

/// Solve `A x = b` in place via LU with partial pivoting. `a` is row-major
/// `n x n` and is destroyed. Returns `None` when the matrix is singular to
/// working precision.
pub fn lu_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n);
    for row in a.iter() {
        debug_assert_eq!(row.len(), n);
    }

    for k in 0..n {
        let mut piv = k;
        let mut max = a[k][k].abs();
        for r in (k + 1)..n {
            if a[r][k].abs() > max {
                max = a[r][k].abs();
                piv = r;
            }
        }
        if max < 1e-300 {
            return None;
        }
        if piv != k {
            a.swap(k, piv);
            b.swap(k, piv);
        }
        let inv = 1.0 / a[k][k];
        for r in (k + 1)..n {
            let factor = a[r][k] * inv;
            if factor == 0.0 {
                continue;
            }
            a[r][k] = 0.0;
            for c in (k + 1)..n {
                a[r][c] -= factor * a[k][c];
            }
            b[r] -= factor * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for c in (k + 1)..n {
            acc -= a[k][c] * b[c];
        }
        b[k] = acc / a[k][k];
    }
    Some(())
}

/// Infinity norm of a slice.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Euclidean norm of a slice.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let mut b = vec![5.0, 10.0];
        lu_solve(&mut a, &mut b).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_singular_matrix() {
        let mut a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let mut b = vec![1.0, 2.0];
        assert!(lu_solve(&mut a, &mut b).is_none());
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let mut a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let mut b = vec![2.0, 3.0];
        lu_solve(&mut a, &mut b).unwrap();
        assert_eq!(b, vec![3.0, 2.0]);
    }
}
