//! Structural sparsity detection by index-set propagation.
//!
//! [`Tracer`] is a [`Scalar`] that carries, next to a plain value, the set
//! of input indices the value structurally depends on. Sets are interned in
//! a thread-local arena so the tracer stays `Copy`; every arithmetic
//! operation takes the union of its operands' sets, which yields a
//! superset of the true nonzero pattern.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use super::dual::Scalar;

/// Sparsity pattern of a Jacobian or Hessian: sorted, deduplicated
/// coordinate lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl SparsityPattern {
    pub fn from_entries(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable();
        entries.dedup();
        for &(r, c) in &entries {
            assert!(r < nrows && c < ncols, "pattern entry ({r},{c}) out of bounds");
        }
        SparsityPattern {
            nrows,
            ncols,
            rows: entries.iter().map(|e| e.0).collect(),
            cols: entries.iter().map(|e| e.1).collect(),
        }
    }

    pub fn dense(nrows: usize, ncols: usize) -> Self {
        let mut entries = Vec::with_capacity(nrows * ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                entries.push((r, c));
            }
        }
        Self::from_entries(nrows, ncols, entries)
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().copied().zip(self.cols.iter().copied())
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.entries().any(|(pr, pc)| pr == r && pc == c)
    }

    /// Column sets per row, for coloring.
    pub fn cols_by_row(&self) -> Vec<Vec<usize>> {
        let mut by_row = vec![Vec::new(); self.nrows];
        for (r, c) in self.entries() {
            by_row[r].push(c);
        }
        by_row
    }
}

struct DepArena {
    sets: Vec<Vec<u32>>,
    union_cache: HashMap<(u32, u32), u32>,
}

impl DepArena {
    fn new() -> Self {
        // id 0 is the empty set
        DepArena { sets: vec![Vec::new()], union_cache: HashMap::new() }
    }

    fn singleton(&mut self, idx: u32) -> u32 {
        self.sets.push(vec![idx]);
        (self.sets.len() - 1) as u32
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        if a == b || b == 0 {
            return a;
        }
        if a == 0 {
            return b;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&id) = self.union_cache.get(&key) {
            return id;
        }
        let (sa, sb) = (&self.sets[a as usize], &self.sets[b as usize]);
        let mut merged = Vec::with_capacity(sa.len() + sb.len());
        let (mut i, mut j) = (0, 0);
        while i < sa.len() && j < sb.len() {
            match sa[i].cmp(&sb[j]) {
                std::cmp::Ordering::Less => {
                    merged.push(sa[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    merged.push(sb[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    merged.push(sa[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        merged.extend_from_slice(&sa[i..]);
        merged.extend_from_slice(&sb[j..]);
        self.sets.push(merged);
        let id = (self.sets.len() - 1) as u32;
        self.union_cache.insert(key, id);
        id
    }
}

thread_local! {
    static ARENA: RefCell<DepArena> = RefCell::new(DepArena::new());
}

fn arena_union(a: u32, b: u32) -> u32 {
    ARENA.with(|ar| ar.borrow_mut().union(a, b))
}

/// Sparsity-tracing scalar: a value plus an interned dependency set.
#[derive(Copy, Clone, Debug)]
pub struct Tracer {
    pub value: f64,
    set: u32,
}

impl Tracer {
    fn with(value: f64, set: u32) -> Self {
        Tracer { value, set }
    }
}

macro_rules! tracer_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Tracer {
            type Output = Tracer;
            fn $method(self, rhs: Tracer) -> Tracer {
                Tracer::with(self.value $op rhs.value, arena_union(self.set, rhs.set))
            }
        }
        impl $trait<f64> for Tracer {
            type Output = Tracer;
            fn $method(self, rhs: f64) -> Tracer {
                Tracer::with(self.value $op rhs, self.set)
            }
        }
        impl $trait<Tracer> for f64 {
            type Output = Tracer;
            fn $method(self, rhs: Tracer) -> Tracer {
                Tracer::with(self $op rhs.value, rhs.set)
            }
        }
    };
}

tracer_binop!(Add, add, +);
tracer_binop!(Sub, sub, -);
tracer_binop!(Mul, mul, *);
tracer_binop!(Div, div, /);

impl Neg for Tracer {
    type Output = Tracer;
    fn neg(self) -> Tracer {
        Tracer::with(-self.value, self.set)
    }
}

impl AddAssign for Tracer {
    fn add_assign(&mut self, rhs: Tracer) {
        *self = *self + rhs;
    }
}

impl SubAssign for Tracer {
    fn sub_assign(&mut self, rhs: Tracer) {
        *self = *self - rhs;
    }
}

impl Scalar for Tracer {
    fn constant(c: f64) -> Self {
        Tracer::with(c, 0)
    }
    fn val(&self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        Tracer::with(self.value.exp(), self.set)
    }
    fn ln(self) -> Self {
        Tracer::with(self.value.ln(), self.set)
    }
    fn ln_1p(self) -> Self {
        Tracer::with(self.value.ln_1p(), self.set)
    }
    fn sqrt(self) -> Self {
        Tracer::with(self.value.sqrt(), self.set)
    }
    fn powi(self, n: i32) -> Self {
        Tracer::with(self.value.powi(n), self.set)
    }
    fn powf(self, p: f64) -> Self {
        Tracer::with(self.value.powf(p), self.set)
    }
    fn recip(self) -> Self {
        Tracer::with(1.0 / self.value, self.set)
    }
}

/// Run `f` under a fresh tracing arena and return the per-output
/// dependency sets as a Jacobian sparsity pattern.
///
/// `seed` supplies the evaluation point (values only steer non-structural
/// branches such as range guards; the dependency sets are propagated
/// unconditionally).
pub fn trace_pattern<F>(n_in: usize, n_out: usize, seed: &[f64], f: F) -> SparsityPattern
where
    F: FnOnce(&[Tracer], &mut [Tracer]),
{
    assert_eq!(seed.len(), n_in);
    ARENA.with(|ar| *ar.borrow_mut() = DepArena::new());
    let inputs: Vec<Tracer> = seed
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let set = ARENA.with(|ar| ar.borrow_mut().singleton(i as u32));
            Tracer::with(v, set)
        })
        .collect();
    let mut outputs = vec![Tracer::constant(0.0); n_out];
    f(&inputs, &mut outputs);
    let mut entries = Vec::new();
    ARENA.with(|ar| {
        let ar = ar.borrow();
        for (row, out) in outputs.iter().enumerate() {
            for &col in &ar.sets[out.set as usize] {
                entries.push((row, col as usize));
            }
        }
    });
    SparsityPattern::from_entries(n_out, n_in, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_function_gives_diagonal_pattern() {
        let p = trace_pattern(3, 3, &[1.0, 2.0, 3.0], |x, out| {
            out[0] = x[0] * x[0];
            out[1] = x[1].exp();
            out[2] = x[2] + 1.0;
        });
        assert_eq!(p.nnz(), 3);
        for (r, c) in p.entries() {
            assert_eq!(r, c);
        }
    }

    #[test]
    fn constant_function_gives_empty_pattern() {
        let p = trace_pattern(2, 2, &[0.5, 0.5], |_x, out| {
            out[0] = Tracer::constant(1.0);
            out[1] = Tracer::constant(2.0);
        });
        assert_eq!(p.nnz(), 0);
    }

    #[test]
    fn union_captures_structural_zero() {
        // x0 * x1 at x1 = 0 has a numerically zero partial yet a structural
        // dependency on x0; the tracer must keep it.
        let p = trace_pattern(2, 1, &[3.0, 0.0], |x, out| {
            out[0] = x[0] * x[1];
        });
        assert!(p.contains(0, 0));
        assert!(p.contains(0, 1));
    }
}
