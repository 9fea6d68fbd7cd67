//! Minimal sparse-matrix support: triplet assembly and CSC storage.

/// Compressed sparse column matrix.
#[derive(Clone, Debug)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix { nrows, ncols, colptr: vec![0; ncols + 1], rowidx: Vec::new(), values: Vec::new() }
    }

    /// Build from triplets; duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|&k| (entries[k].1, entries[k].0));

        let mut cols = Vec::with_capacity(entries.len());
        let mut rowidx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for &k in &order {
            let (r, c, v) = entries[k];
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if cols.last() == Some(&c) && rowidx.last() == Some(&r) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                rowidx.push(r);
                values.push(v);
            }
        }
        let mut colptr = vec![0usize; ncols + 1];
        for &c in &cols {
            colptr[c + 1] += 1;
        }
        for c in 0..ncols {
            colptr[c + 1] += colptr[c];
        }
        CscMatrix { nrows, ncols, colptr, rowidx, values }
    }

    pub fn nnz(&self) -> usize {
        self.rowidx.len()
    }

    /// y += A * x
    pub fn mul_acc(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for c in 0..self.ncols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for k in self.colptr[c]..self.colptr[c + 1] {
                y[self.rowidx[k]] += self.values[k] * xc;
            }
        }
    }

    /// y += A^T * x
    pub fn mul_transpose_acc(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for c in 0..self.ncols {
            let mut acc = 0.0;
            for k in self.colptr[c]..self.colptr[c + 1] {
                acc += self.values[k] * x[self.rowidx[k]];
            }
            y[c] += acc;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                dense[self.rowidx[k]][c] += self.values[k];
            }
        }
        dense
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let mut acc = 0.0;
        for k in self.colptr[c]..self.colptr[c + 1] {
            if self.rowidx[k] == r {
                acc += self.values[k];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = CscMatrix::from_triplets(
            3,
            3,
            &[(2, 1, 1.0), (0, 0, 2.0), (2, 1, 0.5), (1, 2, -1.0)],
        );
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(2, 1), 1.5);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(1, 2), -1.0);
        assert_eq!(a.get(0, 1), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let a = CscMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        let mut y = vec![0.0; 2];
        a.mul_acc(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![7.0, 6.0]);
        let mut z = vec![0.0; 3];
        a.mul_transpose_acc(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![1.0, 3.0, 2.0]);
    }
}
