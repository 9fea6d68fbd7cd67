//! Sparse LDL^T factorization of symmetric quasidefinite matrices.
//!
//! Up-looking factorization over an upper-triangular CSC input with a
//! precomputed elimination tree; no pivoting. The KKT systems fed to it
//! are regularized into quasidefiniteness by the interior-point loop, which
//! reads the returned inertia to steer that regularization.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum LdlError {
    #[error("matrix is not upper triangular")]
    NotUpperTriangular,
    #[error("structurally missing diagonal entry in column {0}")]
    MissingDiagonal(usize),
    #[error("zero pivot at column {0}")]
    ZeroPivot(usize),
}

const NONE: usize = usize::MAX;

/// Symbolic analysis bound to one sparsity pattern (upper-triangular CSC).
#[derive(Clone, Debug)]
pub struct LdlSymbolic {
    n: usize,
    a_colptr: Vec<usize>,
    a_rowidx: Vec<usize>,
    etree: Vec<usize>,
    l_colptr: Vec<usize>,
}

/// Numeric factor `A = L D L^T` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct LdlFactor {
    n: usize,
    l_colptr: Vec<usize>,
    l_rowidx: Vec<usize>,
    l_values: Vec<f64>,
    d: Vec<f64>,
    d_inv: Vec<f64>,
    pub n_positive: usize,
    pub n_negative: usize,
}

impl LdlSymbolic {
    pub fn new(n: usize, a_colptr: &[usize], a_rowidx: &[usize]) -> Result<Self, LdlError> {
        assert_eq!(a_colptr.len(), n + 1);
        // elimination tree and column counts of L
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            let mut has_diag = false;
            for p in a_colptr[j]..a_colptr[j + 1] {
                let mut i = a_rowidx[p];
                if i > j {
                    return Err(LdlError::NotUpperTriangular);
                }
                if i == j {
                    has_diag = true;
                    continue;
                }
                while work[i] != j && i < j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
            if !has_diag {
                return Err(LdlError::MissingDiagonal(j));
            }
        }
        let mut l_colptr = vec![0usize; n + 1];
        for j in 0..n {
            l_colptr[j + 1] = l_colptr[j] + lnz[j];
        }
        Ok(LdlSymbolic {
            n,
            a_colptr: a_colptr.to_vec(),
            a_rowidx: a_rowidx.to_vec(),
            etree,
            l_colptr,
        })
    }

    /// Numeric factorization of values aligned with the analyzed pattern.
    pub fn factor(&self, a_values: &[f64]) -> Result<LdlFactor, LdlError> {
        let n = self.n;
        let nnz_l = self.l_colptr[n];
        let mut l_rowidx = vec![0usize; nnz_l];
        let mut l_values = vec![0.0f64; nnz_l];
        let mut d = vec![0.0f64; n];
        let mut d_inv = vec![0.0f64; n];

        let mut y_vals = vec![0.0f64; n];
        let mut y_used = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.l_colptr[..n].to_vec();

        let mut n_positive = 0usize;
        let mut n_negative = 0usize;

        for k in 0..n {
            let mut nnz_y = 0usize;
            for p in self.a_colptr[k]..self.a_colptr[k + 1] {
                let bidx = self.a_rowidx[p];
                if bidx == k {
                    d[k] = a_values[p];
                    continue;
                }
                y_vals[bidx] = a_values[p];
                let mut next = bidx;
                if !y_used[next] {
                    y_used[next] = true;
                    elim[0] = next;
                    let mut nnz_e = 1usize;
                    next = self.etree[bidx];
                    while next != NONE && next < k {
                        if y_used[next] {
                            break;
                        }
                        y_used[next] = true;
                        elim[nnz_e] = next;
                        nnz_e += 1;
                        next = self.etree[next];
                    }
                    while nnz_e > 0 {
                        nnz_e -= 1;
                        y_idx[nnz_y] = elim[nnz_e];
                        nnz_y += 1;
                    }
                }
            }

            for iy in (0..nnz_y).rev() {
                let cidx = y_idx[iy];
                let tmp = next_space[cidx];
                let yv = y_vals[cidx];
                for j in self.l_colptr[cidx]..tmp {
                    y_vals[l_rowidx[j]] -= l_values[j] * yv;
                }
                let lkj = yv * d_inv[cidx];
                l_rowidx[tmp] = k;
                l_values[tmp] = lkj;
                d[k] -= yv * lkj;
                next_space[cidx] += 1;
                y_vals[cidx] = 0.0;
                y_used[cidx] = false;
            }

            if d[k] == 0.0 || !d[k].is_finite() {
                return Err(LdlError::ZeroPivot(k));
            }
            if d[k] > 0.0 {
                n_positive += 1;
            } else {
                n_negative += 1;
            }
            d_inv[k] = 1.0 / d[k];
        }

        Ok(LdlFactor {
            n,
            l_colptr: self.l_colptr.clone(),
            l_rowidx,
            l_values,
            d,
            d_inv,
            n_positive,
            n_negative,
        })
    }
}

impl LdlFactor {
    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        // forward: L y = b
        for j in 0..self.n {
            let bj = b[j];
            if bj != 0.0 {
                for p in self.l_colptr[j]..self.l_colptr[j + 1] {
                    b[self.l_rowidx[p]] -= self.l_values[p] * bj;
                }
            }
        }
        // diagonal
        for j in 0..self.n {
            b[j] *= self.d_inv[j];
        }
        // backward: L^T x = y
        for j in (0..self.n).rev() {
            let mut acc = b[j];
            for p in self.l_colptr[j]..self.l_colptr[j + 1] {
                acc -= self.l_values[p] * b[self.l_rowidx[p]];
            }
            b[j] = acc;
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Upper-triangular CSC of a dense symmetric matrix.
    fn upper_csc(a: &[Vec<f64>]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n = a.len();
        let mut colptr = vec![0usize; n + 1];
        let mut rowidx = Vec::new();
        let mut values = Vec::new();
        for c in 0..n {
            for r in 0..=c {
                if a[r][c] != 0.0 || r == c {
                    rowidx.push(r);
                    values.push(a[r][c]);
                }
            }
            colptr[c + 1] = rowidx.len();
        }
        (colptr, rowidx, values)
    }

    #[test]
    fn factor_and_solve_match_dense_lu() {
        let a = vec![
            vec![4.0, 1.0, 0.0, 0.5],
            vec![1.0, 3.0, 0.2, 0.0],
            vec![0.0, 0.2, -2.0, 0.3],
            vec![0.5, 0.0, 0.3, -1.5],
        ];
        let (cp, ri, vals) = upper_csc(&a);
        let sym = LdlSymbolic::new(4, &cp, &ri).unwrap();
        let fac = sym.factor(&vals).unwrap();
        assert_eq!(fac.n_positive, 2);
        assert_eq!(fac.n_negative, 2);

        let b = vec![1.0, -2.0, 0.5, 3.0];
        let mut x = b.clone();
        fac.solve(&mut x);

        let mut dense: Vec<Vec<f64>> = a.clone();
        let mut x_ref = b;
        crate::util::linalg::lu_solve(&mut dense, &mut x_ref).unwrap();
        for i in 0..4 {
            assert!((x[i] - x_ref[i]).abs() < 1e-12, "{} vs {}", x[i], x_ref[i]);
        }
    }

    #[test]
    fn inertia_of_diagonal_matrix() {
        let a = vec![
            vec![2.0, 0.0, 0.0],
            vec![0.0, -3.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ];
        let (cp, ri, vals) = upper_csc(&a);
        let sym = LdlSymbolic::new(3, &cp, &ri).unwrap();
        let fac = sym.factor(&vals).unwrap();
        assert_eq!((fac.n_positive, fac.n_negative), (2, 1));
    }

    #[test]
    fn missing_diagonal_is_reported() {
        // column 1 has no structural diagonal entry
        let colptr = vec![0usize, 1, 2];
        let rowidx = vec![0usize, 0];
        assert!(matches!(
            LdlSymbolic::new(2, &colptr, &rowidx),
            Err(LdlError::MissingDiagonal(1))
        ));
    }

    #[test]
    fn lower_triangular_input_is_rejected() {
        let colptr = vec![0usize, 2, 3];
        let rowidx = vec![0usize, 1, 1];
        assert!(matches!(
            LdlSymbolic::new(2, &colptr, &rowidx),
            Err(LdlError::NotUpperTriangular)
        ));
    }

    #[test]
    fn refactor_with_new_values_reuses_symbolic() {
        let a1 = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let (cp, ri, v1) = upper_csc(&a1);
        let sym = LdlSymbolic::new(2, &cp, &ri).unwrap();
        let f1 = sym.factor(&v1).unwrap();
        let mut x = vec![3.0, 4.0];
        f1.solve(&mut x);
        assert!((2.0 * x[0] + x[1] - 3.0).abs() < 1e-12);

        let a2 = vec![vec![5.0, -1.0], vec![-1.0, 2.0]];
        let (_, _, v2) = upper_csc(&a2);
        let f2 = sym.factor(&v2).unwrap();
        let mut y = vec![1.0, 1.0];
        f2.solve(&mut y);
        assert!((5.0 * y[0] - y[1] - 1.0).abs() < 1e-12);
        assert!((-y[0] + 2.0 * y[1] - 1.0).abs() < 1e-12);
    }
}
