//! [`NlpProblem`] implementation backed by the autodiff drivers.
//!
//! Suited to small dense problems (the analytic solver suite, tests);
//! the transcribed optimal-control NLP has its own structured assembly.

use crate::autodiff::{
    detect_sparsity, gradient, hessian_of_lagrangian, jacobian, CscMatrix, DiffFn, Scalar,
    SparsityPattern,
};

use super::NlpProblem;

/// Empty constraint block.
pub struct NoFn {
    n_in: usize,
}

impl DiffFn for NoFn {
    fn n_in(&self) -> usize {
        self.n_in
    }
    fn n_out(&self) -> usize {
        0
    }
    fn eval<S: Scalar>(&self, _x: &[S], _out: &mut [S]) {}
}

/// Dense NLP assembled from [`DiffFn`] pieces.
pub struct AdNlp<FO, FE = NoFn, FI = NoFn> {
    objective: FO,
    eq: FE,
    ineq: FI,
    lb: Vec<f64>,
    ub: Vec<f64>,
    eq_pattern: SparsityPattern,
    ineq_pattern: SparsityPattern,
    hess_pattern: SparsityPattern,
}

impl<FO: DiffFn> AdNlp<FO, NoFn, NoFn> {
    pub fn new(objective: FO) -> Self {
        assert_eq!(objective.n_out(), 1, "objective must be scalar");
        let n = objective.n_in();
        AdNlp {
            objective,
            eq: NoFn { n_in: n },
            ineq: NoFn { n_in: n },
            lb: vec![f64::NEG_INFINITY; n],
            ub: vec![f64::INFINITY; n],
            eq_pattern: SparsityPattern::from_entries(0, n, Vec::new()),
            ineq_pattern: SparsityPattern::from_entries(0, n, Vec::new()),
            hess_pattern: upper_dense(n),
        }
    }
}

fn upper_dense(n: usize) -> SparsityPattern {
    let mut entries = Vec::new();
    for r in 0..n {
        for c in r..n {
            entries.push((r, c));
        }
    }
    SparsityPattern::from_entries(n, n, entries)
}

impl<FO: DiffFn, FE: DiffFn, FI: DiffFn> AdNlp<FO, FE, FI> {
    pub fn with_bounds(mut self, lb: Vec<f64>, ub: Vec<f64>) -> Self {
        assert_eq!(lb.len(), self.objective.n_in());
        assert_eq!(ub.len(), self.objective.n_in());
        self.lb = lb;
        self.ub = ub;
        self
    }

    pub fn with_eq<FE2: DiffFn>(self, eq: FE2, at: &[f64]) -> AdNlp<FO, FE2, FI> {
        assert_eq!(eq.n_in(), self.objective.n_in());
        let pattern = detect_sparsity(&eq, at);
        AdNlp {
            objective: self.objective,
            eq,
            ineq: self.ineq,
            lb: self.lb,
            ub: self.ub,
            eq_pattern: pattern,
            ineq_pattern: self.ineq_pattern,
            hess_pattern: self.hess_pattern,
        }
    }

    pub fn with_ineq<FI2: DiffFn>(self, ineq: FI2, at: &[f64]) -> AdNlp<FO, FE, FI2> {
        assert_eq!(ineq.n_in(), self.objective.n_in());
        let pattern = detect_sparsity(&ineq, at);
        AdNlp {
            objective: self.objective,
            eq: self.eq,
            ineq,
            lb: self.lb,
            ub: self.ub,
            eq_pattern: self.eq_pattern,
            ineq_pattern: pattern,
            hess_pattern: self.hess_pattern,
        }
    }
}

/// Equality and inequality blocks stacked, for one Lagrangian pass.
struct Stacked<'a, FE, FI> {
    eq: &'a FE,
    ineq: &'a FI,
}

impl<FE: DiffFn, FI: DiffFn> DiffFn for Stacked<'_, FE, FI> {
    fn n_in(&self) -> usize {
        self.eq.n_in()
    }
    fn n_out(&self) -> usize {
        self.eq.n_out() + self.ineq.n_out()
    }
    fn eval<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        let me = self.eq.n_out();
        self.eq.eval(x, &mut out[..me]);
        self.ineq.eval(x, &mut out[me..]);
    }
}

fn values_from(pattern: &SparsityPattern, mat: &CscMatrix, values: &mut [f64]) {
    for (k, (r, c)) in pattern.entries().enumerate() {
        values[k] = mat.get(r, c);
    }
}

impl<FO: DiffFn, FE: DiffFn, FI: DiffFn> NlpProblem for AdNlp<FO, FE, FI> {
    fn n_vars(&self) -> usize {
        self.objective.n_in()
    }
    fn n_eq(&self) -> usize {
        self.eq.n_out()
    }
    fn n_ineq(&self) -> usize {
        self.ineq.n_out()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lb.clone(), self.ub.clone())
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.objective.eval_f64(x)[0]
    }

    fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
        let g = gradient(&self.objective, x).expect("objective gradient");
        grad.copy_from_slice(&g);
    }

    fn eq_constraints(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.eq.eval_f64(x));
    }

    fn ineq_constraints(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.ineq.eval_f64(x));
    }

    fn eq_jac_pattern(&self) -> &SparsityPattern {
        &self.eq_pattern
    }

    fn eq_jac_values(&self, x: &[f64], values: &mut [f64]) {
        let jac = jacobian(&self.eq, x, Some(&self.eq_pattern)).expect("equality Jacobian");
        values_from(&self.eq_pattern, &jac, values);
    }

    fn ineq_jac_pattern(&self) -> &SparsityPattern {
        &self.ineq_pattern
    }

    fn ineq_jac_values(&self, x: &[f64], values: &mut [f64]) {
        let jac = jacobian(&self.ineq, x, Some(&self.ineq_pattern)).expect("inequality Jacobian");
        values_from(&self.ineq_pattern, &jac, values);
    }

    fn hess_pattern(&self) -> &SparsityPattern {
        &self.hess_pattern
    }

    fn hess_values(
        &self,
        x: &[f64],
        obj_scale: f64,
        lam_eq: &[f64],
        lam_ineq: &[f64],
        values: &mut [f64],
    ) {
        let stacked = Stacked { eq: &self.eq, ineq: &self.ineq };
        let mut mult = Vec::with_capacity(lam_eq.len() + lam_ineq.len());
        mult.extend_from_slice(lam_eq);
        mult.extend_from_slice(lam_ineq);
        let full = hessian_of_lagrangian(&self.objective, Some((&stacked, &mult[..])), x, None)
            .expect("Lagrangian Hessian");
        values_from(&self.hess_pattern, &full, values);
        if obj_scale != 1.0 {
            let h_f = hessian_of_lagrangian(
                &self.objective,
                None::<(&NoFn, &[f64])>,
                x,
                None,
            )
            .expect("objective Hessian");
            for (k, (r, c)) in self.hess_pattern.entries().enumerate() {
                values[k] += (obj_scale - 1.0) * h_f.get(r, c);
            }
        }
    }
}
