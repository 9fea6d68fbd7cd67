//! Primal-dual interior-point solver for sparse nonlinear programs.
//!
//! Problems implement [`NlpProblem`]: smooth objective, equality and
//! inequality constraints with fixed sparsity, and variable bounds.
//! Inequalities are converted to equalities with bounded slacks internally,
//! so the core iteration handles one uniform barrier formulation.

pub mod adnlp;
pub mod ipm;
pub mod ldl;

pub use adnlp::AdNlp;
pub use ipm::{kkt_residual, solve, warm_start, KktResiduals, Start};

use crate::autodiff::SparsityPattern;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum NlpError {
    #[error("layout mismatch: {0}")]
    Layout(String),
    #[error("initial point not evaluable: {0}")]
    BadInitialPoint(String),
}

/// A smooth NLP with fixed derivative sparsity:
///
/// ```text
/// min f(x)  s.t.  c_eq(x) = 0,  c_ineq(x) <= 0,  lb <= x <= ub
/// ```
pub trait NlpProblem {
    fn n_vars(&self) -> usize;
    fn n_eq(&self) -> usize;
    fn n_ineq(&self) -> usize;

    /// Lower/upper variable bounds; `±INFINITY` marks an absent bound.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);

    fn objective(&self, x: &[f64]) -> f64;
    fn objective_grad(&self, x: &[f64], grad: &mut [f64]);
    fn eq_constraints(&self, x: &[f64], out: &mut [f64]);
    fn ineq_constraints(&self, x: &[f64], out: &mut [f64]);

    /// Fixed sparsity of the equality Jacobian.
    fn eq_jac_pattern(&self) -> &SparsityPattern;
    /// Values aligned with `eq_jac_pattern` entries (same order).
    fn eq_jac_values(&self, x: &[f64], values: &mut [f64]);

    fn ineq_jac_pattern(&self) -> &SparsityPattern;
    fn ineq_jac_values(&self, x: &[f64], values: &mut [f64]);

    /// Fixed sparsity of the upper triangle (row <= col) of the Lagrangian
    /// Hessian `sigma * f'' + sum(lam_eq c_eq'') + sum(lam_ineq c_ineq'')`.
    fn hess_pattern(&self) -> &SparsityPattern;
    fn hess_values(
        &self,
        x: &[f64],
        obj_scale: f64,
        lam_eq: &[f64],
        lam_ineq: &[f64],
        values: &mut [f64],
    );

    /// Optional elimination-ordering hint: groups of (variable indices,
    /// equality row indices, inequality row indices) that interact, in the
    /// order they should be eliminated. Used to keep the KKT factor banded.
    fn kkt_blocks(&self) -> Option<Vec<KktBlock>> {
        None
    }
}

/// One elimination group for the KKT ordering hint.
#[derive(Clone, Debug, Default)]
pub struct KktBlock {
    pub vars: Vec<usize>,
    pub eqs: Vec<usize>,
    pub ineqs: Vec<usize>,
}

/// Interior-point options.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Convergence threshold applied to all four KKT residual norms.
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// Initial barrier parameter for cold starts.
    pub mu_init: f64,
    /// Monotone barrier reduction factor (`mu <- max(tol/10, sigma*mu)`).
    pub mu_shrink: f64,
    /// Barrier subproblem is considered solved below `mu_accept_factor * mu`.
    pub mu_accept_factor: f64,
    /// Base inertia-correction increment for the Hessian block.
    pub reg_init: f64,
    pub reg_max: f64,
    /// Constant dual regularization keeping the KKT matrix quasidefinite.
    pub reg_dual: f64,
    /// Armijo slope fraction for the merit line search.
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Iterations of primal-residual stagnation before declaring the
    /// problem infeasible.
    pub stagnation_window: usize,
    /// Print one line per iteration to stderr.
    pub iteration_log: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kkt_tolerance: 1e-8,
            max_iterations: 200,
            mu_init: 0.1,
            mu_shrink: 0.2,
            mu_accept_factor: 10.0,
            reg_init: 1e-8,
            reg_max: 1e10,
            reg_dual: 1e-10,
            armijo: 1e-4,
            max_backtracks: 40,
            stagnation_window: 20,
            iteration_log: false,
        }
    }
}

/// Termination status of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max_iter",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        };
        write!(f, "{s}")
    }
}

/// Primal-dual solution with KKT residuals and iteration statistics.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub eq_multipliers: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
    pub bound_multipliers_lower: Vec<f64>,
    pub bound_multipliers_upper: Vec<f64>,
    /// Slack values of the inequality constraints at the final point.
    pub ineq_slacks: Vec<f64>,
    pub kkt: ipm::KktResiduals,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// Diagnostic message for non-optimal exits.
    pub message: String,
}
