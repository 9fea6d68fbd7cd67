//! Derivative drivers: sparse Jacobians and Lagrangian Hessians from
//! forward-mode passes.
//!
//! Functions are supplied through [`DiffFn`], written once generically over
//! [`Scalar`]. Jacobians use column compression (greedy distance-2 coloring
//! of the supplied sparsity pattern) and strip-mining over [`CHUNK`]-wide
//! dual passes. Hessians seed two half-chunks of columns per second-order
//! pass, pruned by the pattern when one is given.

use thiserror::Error;

use super::dual::{Dual, HyperDual, Scalar, CHUNK};
use super::sparse::CscMatrix;
use super::sparsity::{trace_pattern, SparsityPattern, Tracer};

#[derive(Error, Debug)]
pub enum AdError {
    #[error("non-finite value propagated to output row {row}")]
    Propagation { row: usize },
    #[error("expected scalar function (n_out = 1), got n_out = {n_out}")]
    NotScalar { n_out: usize },
    #[error("dimension mismatch: {what}")]
    Dimension { what: String },
}

/// A vector function evaluable over any [`Scalar`] type.
pub trait DiffFn {
    fn n_in(&self) -> usize;
    fn n_out(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]);

    fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_out()];
        self.eval(x, &mut out);
        out
    }
}

/// Structural sparsity pattern of the Jacobian of `f`, by index-set
/// propagation at the point `seed`.
pub fn detect_sparsity<F: DiffFn>(f: &F, seed: &[f64]) -> SparsityPattern {
    trace_pattern(f.n_in(), f.n_out(), seed, |x: &[Tracer], out: &mut [Tracer]| {
        f.eval(x, out)
    })
}

/// Greedy distance-2 coloring: columns sharing a row never share a color.
/// Returns color classes as lists of column indices, deterministic in the
/// column order.
fn color_columns(pattern: &SparsityPattern) -> Vec<Vec<usize>> {
    let by_row = pattern.cols_by_row();
    let mut rows_of_col: Vec<Vec<usize>> = vec![Vec::new(); pattern.ncols];
    for (r, c) in pattern.entries() {
        rows_of_col[c].push(r);
    }
    let mut color_of: Vec<Option<usize>> = vec![None; pattern.ncols];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for c in 0..pattern.ncols {
        let mut forbidden = vec![false; classes.len()];
        for &r in &rows_of_col[c] {
            for &c2 in &by_row[r] {
                if let Some(k) = color_of[c2] {
                    forbidden[k] = true;
                }
            }
        }
        let color = match forbidden.iter().position(|&f| !f) {
            Some(k) => k,
            None => {
                classes.push(Vec::new());
                classes.len() - 1
            }
        };
        color_of[c] = Some(color);
        classes[color].push(c);
    }
    classes
}

/// Jacobian of `f` at `x`.
///
/// With a pattern, only the listed entries are computed (compressed via
/// coloring); without one, a dense column sweep is used.
pub fn jacobian<F: DiffFn>(
    f: &F,
    x: &[f64],
    pattern: Option<&SparsityPattern>,
) -> Result<CscMatrix, AdError> {
    let (n, m) = (f.n_in(), f.n_out());
    if x.len() != n {
        return Err(AdError::Dimension { what: format!("x has len {}, expected {}", x.len(), n) });
    }
    if let Some(p) = pattern {
        if p.nrows != m || p.ncols != n {
            return Err(AdError::Dimension {
                what: format!("pattern is {}x{}, expected {}x{}", p.nrows, p.ncols, m, n),
            });
        }
    }

    let groups: Vec<Vec<usize>> = match pattern {
        Some(p) => color_columns(p),
        None => (0..n).map(|c| vec![c]).collect(),
    };
    let rows_of_col: Vec<Vec<usize>> = match pattern {
        Some(p) => {
            let mut roc = vec![Vec::new(); n];
            for (r, c) in p.entries() {
                roc[c].push(r);
            }
            roc
        }
        None => vec![(0..m).collect(); n],
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut xd: Vec<Dual<CHUNK>> = x.iter().map(|&v| Dual::new(v)).collect();
    let mut out = vec![Dual::<CHUNK>::new(0.0); m];

    for chunk in groups.chunks(CHUNK) {
        for v in xd.iter_mut() {
            v.eps = [0.0; CHUNK];
        }
        for (slot, group) in chunk.iter().enumerate() {
            for &c in group {
                xd[c].eps[slot] = 1.0;
            }
        }
        for o in out.iter_mut() {
            *o = Dual::new(0.0);
        }
        f.eval(&xd, &mut out);
        for (row, o) in out.iter().enumerate() {
            if !o.re.is_finite() {
                return Err(AdError::Propagation { row });
            }
        }
        for (slot, group) in chunk.iter().enumerate() {
            for &c in group {
                for &r in &rows_of_col[c] {
                    let v = out[r].eps[slot];
                    if !v.is_finite() {
                        return Err(AdError::Propagation { row: r });
                    }
                    if pattern.is_some() || v != 0.0 {
                        triplets.push((r, c, v));
                    }
                }
            }
        }
    }
    Ok(CscMatrix::from_triplets(m, n, &triplets))
}

/// Gradient of a scalar function (`n_out == 1`).
pub fn gradient<F: DiffFn>(f: &F, x: &[f64]) -> Result<Vec<f64>, AdError> {
    if f.n_out() != 1 {
        return Err(AdError::NotScalar { n_out: f.n_out() });
    }
    let n = f.n_in();
    let mut g = vec![0.0; n];
    let mut xd: Vec<Dual<CHUNK>> = x.iter().map(|&v| Dual::new(v)).collect();
    let mut out = [Dual::<CHUNK>::new(0.0)];
    for (chunk_idx, cols) in (0..n).collect::<Vec<_>>().chunks(CHUNK).enumerate() {
        for v in xd.iter_mut() {
            v.eps = [0.0; CHUNK];
        }
        for (slot, &c) in cols.iter().enumerate() {
            xd[c].eps[slot] = 1.0;
        }
        out[0] = Dual::new(0.0);
        f.eval(&xd, &mut out);
        if !out[0].re.is_finite() {
            return Err(AdError::Propagation { row: 0 });
        }
        for (slot, &c) in cols.iter().enumerate() {
            let v = out[0].eps[slot];
            if !v.is_finite() {
                return Err(AdError::Propagation { row: 0 });
            }
            g[c] = v;
        }
        let _ = chunk_idx;
    }
    Ok(g)
}

/// Half-chunk width for second-order passes: two column windows of this
/// width share one [`HyperDual`] pass.
const HC: usize = CHUNK / 2;

/// Hessian of the Lagrangian `objective(x) + multipliers . constraints(x)`
/// at `x`, returned as a full symmetric sparse matrix.
///
/// A `pattern` over the Hessian prunes which column-window pairs are
/// evaluated; it must be a superset of the true pattern (supersets only
/// cost time, never correctness).
pub fn hessian_of_lagrangian<F: DiffFn, G: DiffFn>(
    objective: &F,
    constraints: Option<(&G, &[f64])>,
    x: &[f64],
    pattern: Option<&SparsityPattern>,
) -> Result<CscMatrix, AdError> {
    let n = objective.n_in();
    if objective.n_out() != 1 {
        return Err(AdError::NotScalar { n_out: objective.n_out() });
    }
    if x.len() != n {
        return Err(AdError::Dimension { what: format!("x has len {}, expected {}", x.len(), n) });
    }
    if let Some((c, mult)) = &constraints {
        if c.n_in() != n || c.n_out() != mult.len() {
            return Err(AdError::Dimension {
                what: format!(
                    "constraints: n_in {}, n_out {}, multipliers {}",
                    c.n_in(),
                    c.n_out(),
                    mult.len()
                ),
            });
        }
    }

    let n_windows = n.div_ceil(HC);
    // window pairs that contain at least one pattern entry
    let mut pair_active = vec![vec![pattern.is_none(); n_windows]; n_windows];
    if let Some(p) = pattern {
        for (r, c) in p.entries() {
            let (a, b) = (r / HC, c / HC);
            pair_active[a.min(b)][a.max(b)] = true;
        }
    }

    let mut xs: Vec<HyperDual<CHUNK>> = x.iter().map(|&v| HyperDual::new(v)).collect();
    let mut cons_buf = constraints
        .as_ref()
        .map(|(c, _)| vec![HyperDual::<CHUNK>::new(0.0); c.n_out()]);

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for wi in 0..n_windows {
        for wj in wi..n_windows {
            if !pair_active[wi][wj] {
                continue;
            }
            for v in xs.iter_mut() {
                v.d = [0.0; CHUNK];
                v.dd = [[0.0; CHUNK]; CHUNK];
            }
            let cols_i: Vec<usize> = (wi * HC..((wi + 1) * HC).min(n)).collect();
            let cols_j: Vec<usize> = (wj * HC..((wj + 1) * HC).min(n)).collect();
            for (slot, &c) in cols_i.iter().enumerate() {
                xs[c].d[slot] = 1.0;
            }
            if wj != wi {
                for (slot, &c) in cols_j.iter().enumerate() {
                    xs[c].d[HC + slot] = 1.0;
                }
            }

            let mut lag = {
                let mut obj_out = [HyperDual::<CHUNK>::new(0.0)];
                objective.eval(&xs, &mut obj_out);
                obj_out[0]
            };
            if let (Some((cons, mult)), Some(buf)) = (&constraints, cons_buf.as_mut()) {
                for b in buf.iter_mut() {
                    *b = HyperDual::new(0.0);
                }
                cons.eval(&xs, buf);
                for (ci, &li) in buf.iter().zip(mult.iter()) {
                    if li != 0.0 {
                        lag += *ci * li;
                    }
                }
            }
            if !lag.re.is_finite() {
                return Err(AdError::Propagation { row: 0 });
            }

            if wj == wi {
                for (a, &ra) in cols_i.iter().enumerate() {
                    for (b, &rb) in cols_i.iter().enumerate() {
                        if rb < ra {
                            continue;
                        }
                        let v = lag.dd[a][b];
                        debug_assert!(
                            (lag.dd[a][b] - lag.dd[b][a]).abs()
                                <= 1e-12 * (1.0 + lag.dd[a][b].abs()),
                            "second-order coefficients must be symmetric"
                        );
                        if !v.is_finite() {
                            return Err(AdError::Propagation { row: ra });
                        }
                        if v != 0.0 {
                            triplets.push((ra, rb, v));
                            if rb != ra {
                                triplets.push((rb, ra, v));
                            }
                        }
                    }
                }
            } else {
                for (a, &ra) in cols_i.iter().enumerate() {
                    for (b, &rb) in cols_j.iter().enumerate() {
                        let v = lag.dd[a][HC + b];
                        if !v.is_finite() {
                            return Err(AdError::Propagation { row: ra });
                        }
                        if v != 0.0 {
                            triplets.push((ra, rb, v));
                            triplets.push((rb, ra, v));
                        }
                    }
                }
            }
        }
    }
    Ok(CscMatrix::from_triplets(n, n, &triplets))
}
