//! Analytic NLP suite: problems with hand-derivable optima, solved to
//! tight KKT tolerances, plus determinism and warm-start behaviour.

use frothmpc::autodiff::{DiffFn, Scalar};
use frothmpc::nlp::{kkt_residual, solve, warm_start, AdNlp, SolveStatus, SolverOptions, Start};

struct Quadratic;
impl DiffFn for Quadratic {
    fn n_in(&self) -> usize {
        1
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = x[0] * x[0];
    }
}

/// x >= 1 expressed as 1 - x <= 0.
struct AtLeastOne;
impl DiffFn for AtLeastOne {
    fn n_in(&self) -> usize {
        1
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = -x[0] + 1.0;
    }
}

struct Rosenbrock;
impl DiffFn for Rosenbrock {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        let a = -x[0] + 1.0;
        let b = x[1] - x[0] * x[0];
        out[0] = a * a + b * b * 100.0;
    }
}

/// min x0 + x1 s.t. x0^2 + x1^2 = 2 -> optimum (-1, -1), lambda = 1/2.
struct SumObj;
impl DiffFn for SumObj {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = x[0] + x[1];
    }
}
struct CircleEq;
impl DiffFn for CircleEq {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = x[0] * x[0] + x[1] * x[1] - 2.0;
    }
}

/// min (x0-2)^2 + (x1-1)^2 s.t. x0^2 - x1 <= 0, x0 + x1 <= 2
/// -> optimum (1, 1), both constraints active.
struct ShiftedQuad;
impl DiffFn for ShiftedQuad {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        let a = x[0] - 2.0;
        let b = x[1] - 1.0;
        out[0] = a * a + b * b;
    }
}
struct TwoIneq;
impl DiffFn for TwoIneq {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = x[0] * x[0] - x[1];
        out[1] = x[0] + x[1] - 2.0;
    }
}

/// max x0 x1 under x0 + x1 = 2 (written as min -x0 x1) -> (1, 1).
struct NegProduct;
impl DiffFn for NegProduct {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = -(x[0] * x[1]);
    }
}
struct LineEq;
impl DiffFn for LineEq {
    fn n_in(&self) -> usize {
        2
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = x[0] + x[1] - 2.0;
    }
}

/// Bounded quadratic: min (x-3)^2 with x in [0, 1] -> x* = 1.
struct OffsetQuad;
impl DiffFn for OffsetQuad {
    fn n_in(&self) -> usize {
        1
    }
    fn n_out(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        let a = x[0] - 3.0;
        out[0] = a * a;
    }
}

fn opts() -> SolverOptions {
    SolverOptions { kkt_tolerance: 1e-8, ..Default::default() }
}

#[test]
fn constrained_quadratic_reaches_hand_solved_kkt_point() {
    // min x^2 s.t. x >= 1: optimum x* = 1, inequality multiplier 2.
    let p = AdNlp::new(Quadratic).with_ineq(AtLeastOne, &[2.0]);
    let r = solve(&p, &Start::from_point(vec![2.0]), &opts());
    assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
    assert!((r.x[0] - 1.0).abs() < 1e-6, "x = {}", r.x[0]);
    assert!((r.ineq_multipliers[0] - 2.0).abs() < 1e-6, "mult = {}", r.ineq_multipliers[0]);

    // kkt_residual at the exact hand point with exact multiplier
    let res = kkt_residual(&p, &[1.0], &[], &[2.0], &[0.0], &[0.0]);
    assert!(res.stationarity <= 1e-12);
    assert!(res.primal_feasibility <= 1e-12);
    assert!(res.dual_feasibility <= 1e-12);
    assert!(res.complementarity <= 1e-12);
}

#[test]
fn rosenbrock_from_classic_start() {
    let p = AdNlp::new(Rosenbrock);
    let r = solve(&p, &Start::from_point(vec![-1.2, 1.0]), &opts());
    assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
    assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "x = {:?}", r.x);

    // gradient-norm oracle at the reported solution
    let res = kkt_residual(&p, &r.x, &[], &[], &vec![0.0; 2], &vec![0.0; 2]);
    assert!(res.stationarity <= 1e-6);
}

#[test]
fn equality_constrained_linear_objective() {
    let p = AdNlp::new(SumObj).with_eq(CircleEq, &[1.0, 1.0]);
    let r = solve(&p, &Start::from_point(vec![0.5, -1.5]), &opts());
    assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
    assert!((r.x[0] + 1.0).abs() < 1e-6, "x = {:?}", r.x);
    assert!((r.x[1] + 1.0).abs() < 1e-6);
    assert!((r.eq_multipliers[0] - 0.5).abs() < 1e-6);
}

#[test]
fn two_active_inequalities() {
    let p = AdNlp::new(ShiftedQuad).with_ineq(TwoIneq, &[0.0, 0.0]);
    let r = solve(&p, &Start::from_point(vec![0.0, 0.0]), &opts());
    assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
    assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "x = {:?}", r.x);
}

#[test]
fn equality_constrained_product_maximization() {
    let p = AdNlp::new(NegProduct).with_eq(LineEq, &[0.5, 0.5]);
    let r = solve(&p, &Start::from_point(vec![0.3, 1.9]), &opts());
    assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
    assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "x = {:?}", r.x);
}

#[test]
fn active_upper_bound() {
    let p = AdNlp::new(OffsetQuad).with_bounds(vec![0.0], vec![1.0]);
    let r = solve(&p, &Start::from_point(vec![0.5]), &opts());
    assert_eq!(r.status, SolveStatus::Optimal, "{}", r.message);
    assert!((r.x[0] - 1.0).abs() < 1e-6, "x = {}", r.x[0]);
    // upper-bound multiplier equals -f'(1) = 4
    assert!((r.bound_multipliers_upper[0] - 4.0).abs() < 1e-5);
}

#[test]
fn deterministic_repeat_runs_are_bitwise_identical() {
    let run = || {
        let p = AdNlp::new(ShiftedQuad).with_ineq(TwoIneq, &[0.0, 0.0]);
        solve(&p, &Start::from_point(vec![0.0, 0.0]), &opts())
    };
    let a = run();
    let b = run();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.x[0].to_bits(), b.x[0].to_bits());
    assert_eq!(a.x[1].to_bits(), b.x[1].to_bits());
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
}

#[test]
fn kkt_residual_reports_hand_computed_violation() {
    let p = AdNlp::new(SumObj).with_eq(CircleEq, &[1.0, 1.0]);
    // at (2, 1): c = 4 + 1 - 2 = 3
    let res = kkt_residual(&p, &[2.0, 1.0], &[0.0], &[], &vec![0.0; 2], &vec![0.0; 2]);
    assert!((res.primal_feasibility - 3.0).abs() < 1e-14);
    // zero multipliers at the unconstrained optimum of x^2: stationarity = 0
    let q = AdNlp::new(Quadratic);
    let res0 = kkt_residual(&q, &[0.0], &[], &[], &[0.0], &[0.0]);
    assert!(res0.stationarity <= 1e-14);
}

#[test]
fn warm_start_resolves_in_few_iterations() {
    let p = AdNlp::new(ShiftedQuad).with_ineq(TwoIneq, &[0.0, 0.0]);
    let cold = solve(&p, &Start::from_point(vec![0.0, 0.0]), &opts());
    assert_eq!(cold.status, SolveStatus::Optimal);

    let start = warm_start(&p, &cold, &cold.x, 1e-6);
    let hot = solve(&p, &start, &opts());
    assert_eq!(hot.status, SolveStatus::Optimal, "{}", hot.message);
    assert!(
        hot.iterations <= 3,
        "warm re-solve took {} iterations (cold: {})",
        hot.iterations,
        cold.iterations
    );
    assert!(hot.iterations < cold.iterations);
}

#[test]
fn warm_start_point_respects_bounds() {
    let p = AdNlp::new(OffsetQuad).with_bounds(vec![0.0], vec![1.0]);
    let r = solve(&p, &Start::from_point(vec![0.5]), &opts());
    // shifted guess far outside the box must be clamped strictly inside
    let s = warm_start(&p, &r, &[12.0], 1e-6);
    assert!(s.x[0] < 1.0 && s.x[0] > 0.0);
    let s2 = warm_start(&p, &r, &[-7.0], 1e-6);
    assert!(s2.x[0] > 0.0 && s2.x[0] < 1.0);
}

#[test]
fn infeasible_problem_is_flagged() {
    // x^2 <= -1 is infeasible everywhere
    struct Impossible;
    impl DiffFn for Impossible {
        fn n_in(&self) -> usize {
            1
        }
        fn n_out(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
            out[0] = x[0] * x[0] + 1.0;
        }
    }
    let p = AdNlp::new(Quadratic).with_ineq(Impossible, &[0.5]);
    let r = solve(&p, &Start::from_point(vec![0.5]), &opts());
    assert!(
        matches!(r.status, SolveStatus::Infeasible | SolveStatus::MaxIterations),
        "unexpected status {:?}",
        r.status
    );
    assert_ne!(r.status, SolveStatus::Optimal);
}
