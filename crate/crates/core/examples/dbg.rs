use frothmpc::autodiff::{DiffFn, Scalar};
use frothmpc::nlp::{solve, AdNlp, SolverOptions, Start};

struct SumObj;
impl DiffFn for SumObj {
    fn n_in(&self) -> usize { 2 }
    fn n_out(&self) -> usize { 1 }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) { out[0] = x[0] + x[1]; }
}
struct CircleEq;
impl DiffFn for CircleEq {
    fn n_in(&self) -> usize { 2 }
    fn n_out(&self) -> usize { 1 }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = x[0] * x[0] + x[1] * x[1] - 2.0;
    }
}
fn main() {
    let p = AdNlp::new(SumObj).with_eq(CircleEq, &[1.0, 1.0]);
    let o = SolverOptions { iteration_log: true, max_iterations: 60, ..Default::default() };
    let r = solve(&p, &Start::from_point(vec![0.5, -1.5]), &o);
    println!("{:?} {:?} iters={} msg={}", r.status, r.x, r.iterations, r.message);
}
