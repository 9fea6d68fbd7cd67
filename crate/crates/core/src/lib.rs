//! Economic model predictive control of a surrogate froth-flotation cell.
//!
//! The crate is organised in layers:
//!
//! - [`autodiff`]: forward-mode dual numbers (first and second order),
//!   structural sparsity detection and sparse derivative assembly.
//! - [`model`]: the flotation-cell DAE (states, algebraic air-recovery
//!   relation, outputs, steady-state solving, normalization).
//! - [`collocation`]: Radau IIA points/weights and full-discretization
//!   transcription of an optimal control problem into an NLP.
//! - [`nlp`]: a primal-dual interior-point solver with sparse LDL^T
//!   factorization of the KKT system.
//! - [`empc`]: the economic objective, path constraints and the
//!   receding-horizon controller.
//! - [`plant`]: the simulated "true" process with 1 s PI regulatory loops
//!   and deliberate parameter mismatch.
//! - [`harness`]: scenario runner, KPI computation, CSV/JSON output.

pub mod autodiff;
pub mod collocation;
pub mod nlp;
pub mod util;
