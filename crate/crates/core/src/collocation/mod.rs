//! Orthogonal collocation over finite elements.
//!
//! [`basis`] supplies Radau IIA abscissae, quadrature weights and
//! differentiation matrices; [`grid`] assembles them into a finite-element
//! mesh over the normalized horizon; [`transcribe`] turns a DAE plus cost
//! into a finite-dimensional NLP.

pub mod basis;
pub mod grid;

pub use basis::{
    differentiation_matrix, lagrange_basis_at, quadrature_weights, radau_points, CollocationError,
};
pub use grid::CollocationGrid;
