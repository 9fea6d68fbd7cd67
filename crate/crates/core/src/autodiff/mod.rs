//! Forward-mode automatic differentiation.
//!
//! First-order derivatives come from [`Dual`] passes, second-order from
//! [`HyperDual`]; sparsity is discovered structurally with [`Tracer`] and
//! exploited through column coloring. Everything is value-semantic: no
//! global tape, concurrent evaluation is safe.

mod deriv;
mod dual;
mod sparse;
mod sparsity;

pub use deriv::{detect_sparsity, gradient, hessian_of_lagrangian, jacobian, AdError, DiffFn};
pub use dual::{Dual, HyperDual, Scalar, CHUNK};
pub use sparse::CscMatrix;
pub use sparsity::{trace_pattern, SparsityPattern, Tracer};
