//! Primal-dual interior-point iteration.
//!
//! Inequalities `g(x) <= 0` become equalities `g(x) + s = 0` with bounded
//! slacks, so the core loop solves one barrier problem
//!
//! ```text
//! min f(v) - mu * sum ln(v - l) - mu * sum ln(u - v)   s.t.  C(v) = 0
//! ```
//!
//! over `v = (x, s)`. Newton steps come from a regularized symmetric KKT
//! system factorized by sparse LDL^T; inertia steers the regularization, a
//! fraction-to-boundary rule keeps iterates strictly interior, and an l1
//! merit line search globalizes. The barrier parameter shrinks
//! monotonically (`mu <- max(tol/10, sigma * mu)`).

use std::time::Instant;

use super::ldl::{LdlError, LdlSymbolic};
use super::{NlpProblem, SolveResult, SolveStatus, SolverOptions};
use crate::util::linalg::norm_inf;

/// Infinity norms of the four KKT residual groups.
#[derive(Clone, Copy, Debug, Default)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal_feasibility: f64,
    pub dual_feasibility: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_feasibility)
            .max(self.dual_feasibility)
            .max(self.complementarity)
    }
}

/// Initial primal point plus optional multiplier estimates.
#[derive(Clone, Debug, Default)]
pub struct Start {
    pub x: Vec<f64>,
    pub eq_multipliers: Option<Vec<f64>>,
    pub ineq_multipliers: Option<Vec<f64>>,
    pub bound_multipliers: Option<(Vec<f64>, Vec<f64>)>,
}

impl Start {
    pub fn from_point(x: Vec<f64>) -> Self {
        Start { x, ..Default::default() }
    }
}

/// Build a warm start from a previous solution and a (possibly shifted)
/// primal guess, pushing the point strictly interior by `margin_frac` of
/// each bound range.
pub fn warm_start<P: NlpProblem>(
    problem: &P,
    previous: &SolveResult,
    shifted_x: &[f64],
    margin_frac: f64,
) -> Start {
    let (lb, ub) = problem.bounds();
    let mut x = shifted_x.to_vec();
    push_interior(&mut x, &lb, &ub, margin_frac);
    Start {
        x,
        eq_multipliers: Some(previous.eq_multipliers.clone()),
        ineq_multipliers: Some(previous.ineq_multipliers.clone()),
        bound_multipliers: Some((
            previous.bound_multipliers_lower.clone(),
            previous.bound_multipliers_upper.clone(),
        )),
    }
}

/// Clamp `x` into `[l + m, u - m]` with `m = margin_frac * range` (or an
/// absolute margin for one-sided bounds).
pub fn push_interior(x: &mut [f64], lb: &[f64], ub: &[f64], margin_frac: f64) {
    for i in 0..x.len() {
        let (l, u) = (lb[i], ub[i]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                let m = margin_frac * (u - l);
                x[i] = x[i].clamp(l + m, u - m);
            }
            (true, false) => {
                let m = margin_frac * l.abs().max(1.0);
                x[i] = x[i].max(l + m);
            }
            (false, true) => {
                let m = margin_frac * u.abs().max(1.0);
                x[i] = x[i].min(u - m);
            }
            (false, false) => {}
        }
    }
}

/// Four KKT residual norms at an arbitrary primal-dual point (reference
/// complementarity target mu = 0).
pub fn kkt_residual<P: NlpProblem>(
    problem: &P,
    x: &[f64],
    eq_multipliers: &[f64],
    ineq_multipliers: &[f64],
    bound_lower: &[f64],
    bound_upper: &[f64],
) -> KktResiduals {
    let n = problem.n_vars();
    let (me, mi) = (problem.n_eq(), problem.n_ineq());
    assert_eq!(x.len(), n, "primal point length");
    assert_eq!(eq_multipliers.len(), me, "equality multiplier length");
    assert_eq!(ineq_multipliers.len(), mi, "inequality multiplier length");
    let (lb, ub) = problem.bounds();

    let mut grad = vec![0.0; n];
    problem.objective_grad(x, &mut grad);
    let mut stat = grad;

    if me > 0 {
        let pat = problem.eq_jac_pattern();
        let mut vals = vec![0.0; pat.nnz()];
        problem.eq_jac_values(x, &mut vals);
        for (k, (r, c)) in pat.entries().enumerate() {
            stat[c] += vals[k] * eq_multipliers[r];
        }
    }
    if mi > 0 {
        let pat = problem.ineq_jac_pattern();
        let mut vals = vec![0.0; pat.nnz()];
        problem.ineq_jac_values(x, &mut vals);
        for (k, (r, c)) in pat.entries().enumerate() {
            stat[c] += vals[k] * ineq_multipliers[r];
        }
    }
    for i in 0..n {
        stat[i] -= bound_lower[i];
        stat[i] += bound_upper[i];
    }

    let mut c_eq = vec![0.0; me];
    problem.eq_constraints(x, &mut c_eq);
    let mut g = vec![0.0; mi];
    problem.ineq_constraints(x, &mut g);

    let mut primal = norm_inf(&c_eq);
    for &gi in &g {
        primal = primal.max(gi.max(0.0));
    }
    for i in 0..n {
        if lb[i].is_finite() {
            primal = primal.max(lb[i] - x[i]);
        }
        if ub[i].is_finite() {
            primal = primal.max(x[i] - ub[i]);
        }
    }

    let mut dual = 0.0f64;
    for &m in ineq_multipliers {
        dual = dual.max(-m);
    }
    for i in 0..n {
        dual = dual.max(-bound_lower[i]).max(-bound_upper[i]);
    }

    let mut compl = 0.0f64;
    for i in 0..mi {
        compl = compl.max((ineq_multipliers[i] * g[i]).abs());
    }
    for i in 0..n {
        if lb[i].is_finite() {
            compl = compl.max((bound_lower[i] * (x[i] - lb[i])).abs());
        }
        if ub[i].is_finite() {
            compl = compl.max((bound_upper[i] * (ub[i] - x[i])).abs());
        }
    }

    KktResiduals {
        stationarity: norm_inf(&stat),
        primal_feasibility: primal,
        dual_feasibility: dual,
        complementarity: compl,
    }
}

// ---------------------------------------------------------------------------
// KKT assembly
// ---------------------------------------------------------------------------

/// Where a numeric KKT entry comes from.
#[derive(Clone, Copy, Debug)]
enum Source {
    Hess(usize),
    EqJac(usize),
    IneqJac(usize),
    SlackUnit,
    DiagPrimal(usize),
    DiagDual,
}

struct KktAssembly {
    dim: usize,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    /// (source, slot in `values`)
    contributions: Vec<(Source, usize)>,
    symbolic: LdlSymbolic,
}

fn build_permutation<P: NlpProblem>(problem: &P, nv: usize, me: usize, mi: usize) -> Vec<usize> {
    let n = problem.n_vars();
    let dim = nv + me + mi;
    let mut order: Vec<usize> = Vec::with_capacity(dim);
    let mut seen = vec![false; dim];
    if let Some(blocks) = problem.kkt_blocks() {
        let push = |idx: usize, order: &mut Vec<usize>, seen: &mut Vec<bool>| {
            if !seen[idx] {
                seen[idx] = true;
                order.push(idx);
            }
        };
        for b in &blocks {
            for &v in &b.vars {
                push(v, &mut order, &mut seen);
            }
            for &i in &b.ineqs {
                push(n + i, &mut order, &mut seen); // slack of inequality i
            }
            for &e in &b.eqs {
                push(nv + e, &mut order, &mut seen);
            }
            for &i in &b.ineqs {
                push(nv + me + i, &mut order, &mut seen);
            }
        }
    }
    for idx in 0..dim {
        if !seen[idx] {
            order.push(idx);
        }
    }
    // order[k] = original index eliminated k-th; invert to get positions
    let mut pos = vec![0usize; dim];
    for (k, &orig) in order.iter().enumerate() {
        pos[orig] = k;
    }
    pos
}

fn build_kkt<P: NlpProblem>(problem: &P) -> Result<(KktAssembly, Vec<usize>), LdlError> {
    let n = problem.n_vars();
    let (me, mi) = (problem.n_eq(), problem.n_ineq());
    let nv = n + mi;
    let dim = nv + me + mi;
    let pos = build_permutation(problem, nv, me, mi);

    // raw entries in permuted upper-triangular coordinates
    let mut raw: Vec<(usize, usize, Source)> = Vec::new();
    let push = |a: usize, b: usize, src: Source, raw: &mut Vec<(usize, usize, Source)>| {
        let (pa, pb) = (pos[a], pos[b]);
        let (r, c) = if pa <= pb { (pa, pb) } else { (pb, pa) };
        raw.push((r, c, src));
    };

    for (k, (r, c)) in problem.hess_pattern().entries().enumerate() {
        debug_assert!(r <= c, "Hessian pattern must be upper triangular");
        push(r, c, Source::Hess(k), &mut raw);
    }
    for (k, (r, c)) in problem.eq_jac_pattern().entries().enumerate() {
        push(nv + r, c, Source::EqJac(k), &mut raw);
    }
    for (k, (r, c)) in problem.ineq_jac_pattern().entries().enumerate() {
        push(nv + me + r, c, Source::IneqJac(k), &mut raw);
    }
    for i in 0..mi {
        push(nv + me + i, n + i, Source::SlackUnit, &mut raw);
    }
    for v in 0..nv {
        push(v, v, Source::DiagPrimal(v), &mut raw);
    }
    for c in 0..(me + mi) {
        push(nv + c, nv + c, Source::DiagDual, &mut raw);
    }

    // unique sorted coordinates -> CSC
    let mut coords: Vec<(usize, usize)> = raw.iter().map(|&(r, c, _)| (r, c)).collect();
    coords.sort_unstable_by_key(|&(r, c)| (c, r));
    coords.dedup();
    let mut colptr = vec![0usize; dim + 1];
    for &(_, c) in &coords {
        colptr[c + 1] += 1;
    }
    for c in 0..dim {
        colptr[c + 1] += colptr[c];
    }
    let rowidx: Vec<usize> = coords.iter().map(|&(r, _)| r).collect();

    let slot_of = |r: usize, c: usize| -> usize {
        let lo = colptr[c];
        let hi = colptr[c + 1];
        lo + rowidx[lo..hi].partition_point(|&ri| ri < r)
    };
    let contributions: Vec<(Source, usize)> =
        raw.iter().map(|&(r, c, src)| (src, slot_of(r, c))).collect();

    let symbolic = LdlSymbolic::new(dim, &colptr, &rowidx)?;
    Ok((KktAssembly { dim, colptr, rowidx, contributions, symbolic }, pos))
}

impl KktAssembly {
    #[allow(clippy::too_many_arguments)]
    fn fill_values(
        &self,
        hess: &[f64],
        eq_jac: &[f64],
        ineq_jac: &[f64],
        sigma: &[f64],
        delta_w: f64,
        delta_c: f64,
        values: &mut [f64],
    ) {
        values.iter_mut().for_each(|v| *v = 0.0);
        for &(src, slot) in &self.contributions {
            values[slot] += match src {
                Source::Hess(k) => hess[k],
                Source::EqJac(k) => eq_jac[k],
                Source::IneqJac(k) => ineq_jac[k],
                Source::SlackUnit => 1.0,
                Source::DiagPrimal(v) => sigma[v] + delta_w,
                Source::DiagDual => -delta_c,
            };
        }
    }

    /// y = K x for the symmetric matrix stored as its upper triangle.
    fn mul_sym(&self, values: &[f64], x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..self.dim {
            for k in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowidx[k];
                let v = values[k];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Solver state
// ---------------------------------------------------------------------------

struct Iterate {
    /// v = (x, slacks)
    v: Vec<f64>,
    lam: Vec<f64>,
    z_lower: Vec<f64>,
    z_upper: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    n: usize,
    me: usize,
    mi: usize,
}

impl Iterate {
    fn nv(&self) -> usize {
        self.n + self.mi
    }
}

struct Evaluation {
    f: f64,
    grad: Vec<f64>,
    c: Vec<f64>, // [c_eq; g + s]
    eq_jac: Vec<f64>,
    ineq_jac: Vec<f64>,
}

fn evaluate<P: NlpProblem>(problem: &P, it: &Iterate) -> Result<Evaluation, String> {
    let x = &it.v[..it.n];
    let f = problem.objective(x);
    if !f.is_finite() {
        return Err("objective returned a non-finite value".into());
    }
    let mut grad = vec![0.0; it.n];
    problem.objective_grad(x, &mut grad);
    if grad.iter().any(|v| !v.is_finite()) {
        return Err("objective gradient returned a non-finite value".into());
    }
    let mut c_eq = vec![0.0; it.me];
    problem.eq_constraints(x, &mut c_eq);
    if c_eq.iter().any(|v| !v.is_finite()) {
        return Err("equality constraints returned a non-finite value".into());
    }
    let mut g = vec![0.0; it.mi];
    problem.ineq_constraints(x, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err("inequality constraints returned a non-finite value".into());
    }
    let mut eq_jac = vec![0.0; problem.eq_jac_pattern().nnz()];
    problem.eq_jac_values(x, &mut eq_jac);
    if eq_jac.iter().any(|v| !v.is_finite()) {
        return Err("equality Jacobian returned a non-finite value".into());
    }
    let mut ineq_jac = vec![0.0; problem.ineq_jac_pattern().nnz()];
    problem.ineq_jac_values(x, &mut ineq_jac);
    if ineq_jac.iter().any(|v| !v.is_finite()) {
        return Err("inequality Jacobian returned a non-finite value".into());
    }
    let mut c = vec![0.0; it.me + it.mi];
    c[..it.me].copy_from_slice(&c_eq);
    for i in 0..it.mi {
        c[it.me + i] = g[i] + it.v[it.n + i];
    }
    Ok(Evaluation { f, grad, c, eq_jac, ineq_jac })
}

/// Residuals of the original problem (mu = 0) at the current iterate.
fn residuals(it: &Iterate, ev: &Evaluation, pat_stat: &mut Vec<f64>) -> KktResiduals {
    let nv = it.nv();
    pat_stat.clear();
    pat_stat.resize(nv, 0.0);
    pat_stat[..it.n].copy_from_slice(&ev.grad);
    // J^T lam contribution is added by the caller (it owns the patterns);
    // handled in solve() below.
    KktResiduals {
        stationarity: 0.0,
        primal_feasibility: norm_inf(&ev.c),
        dual_feasibility: {
            let mut d = 0.0f64;
            for &z in it.z_lower.iter().chain(it.z_upper.iter()) {
                d = d.max(-z);
            }
            d
        },
        complementarity: {
            let mut cm = 0.0f64;
            for i in 0..nv {
                if it.lb[i].is_finite() {
                    cm = cm.max((it.z_lower[i] * (it.v[i] - it.lb[i])).abs());
                }
                if it.ub[i].is_finite() {
                    cm = cm.max((it.z_upper[i] * (it.ub[i] - it.v[i])).abs());
                }
            }
            cm
        },
    }
}

/// Barrier objective (without the constraint penalty).
fn barrier_objective(it: &Iterate, f: f64, mu: f64) -> f64 {
    let mut phi = f;
    for i in 0..it.nv() {
        if it.lb[i].is_finite() {
            phi -= mu * (it.v[i] - it.lb[i]).ln();
        }
        if it.ub[i].is_finite() {
            phi -= mu * (it.ub[i] - it.v[i]).ln();
        }
    }
    phi
}

/// Largest step with `v + alpha dv` keeping a fraction `tau` of the gap.
fn fraction_to_boundary(v: &[f64], dv: &[f64], lb: &[f64], ub: &[f64], tau: f64) -> f64 {
    let mut alpha = 1.0f64;
    for i in 0..v.len() {
        if dv[i] < 0.0 && lb[i].is_finite() {
            alpha = alpha.min(-tau * (v[i] - lb[i]) / dv[i]);
        }
        if dv[i] > 0.0 && ub[i].is_finite() {
            alpha = alpha.min(tau * (ub[i] - v[i]) / dv[i]);
        }
    }
    alpha
}

fn dual_fraction_to_boundary(z: &[f64], dz: &[f64], active: &[bool], tau: f64) -> f64 {
    let mut alpha = 1.0f64;
    for i in 0..z.len() {
        if active[i] && dz[i] < 0.0 {
            alpha = alpha.min(-tau * z[i] / dz[i]);
        }
    }
    alpha
}

// ---------------------------------------------------------------------------
// Main loop
// ---------------------------------------------------------------------------

/// Solve the NLP from `start` with the given options.
pub fn solve<P: NlpProblem>(problem: &P, start: &Start, opts: &SolverOptions) -> SolveResult {
    let t0 = Instant::now();
    let n = problem.n_vars();
    let (me, mi) = (problem.n_eq(), problem.n_ineq());
    let nv = n + mi;

    let fail = |status: SolveStatus, message: String, it: Option<&Iterate>, iters: usize| {
        let x = it.map(|i| i.v[..n].to_vec()).unwrap_or_else(|| start.x.clone());
        SolveResult {
            status,
            x,
            objective: f64::NAN,
            eq_multipliers: it.map(|i| i.lam[..me].to_vec()).unwrap_or_default(),
            ineq_multipliers: it.map(|i| i.lam[me..].to_vec()).unwrap_or_default(),
            bound_multipliers_lower: it.map(|i| i.z_lower[..n].to_vec()).unwrap_or_default(),
            bound_multipliers_upper: it.map(|i| i.z_upper[..n].to_vec()).unwrap_or_default(),
            ineq_slacks: it.map(|i| i.v[n..].to_vec()).unwrap_or_default(),
            kkt: KktResiduals::default(),
            iterations: iters,
            wall_time_s: t0.elapsed().as_secs_f64(),
            message,
        }
    };

    assert_eq!(start.x.len(), n, "start point length must match n_vars");
    let (lb_x, ub_x) = problem.bounds();

    // extended bounds over v = (x, s)
    let mut lb = lb_x.clone();
    let mut ub = ub_x.clone();
    lb.extend(std::iter::repeat(0.0).take(mi));
    ub.extend(std::iter::repeat(f64::INFINITY).take(mi));

    let warm = start.eq_multipliers.is_some() || start.ineq_multipliers.is_some();
    let mut it = Iterate {
        v: {
            let mut v = start.x.clone();
            push_interior(&mut v, &lb_x, &ub_x, 1e-6);
            // slack init: feasible where possible, small positive otherwise
            let slack_floor = if warm { 1e-10 } else { 1e-4 };
            let mut g0 = vec![0.0; mi];
            problem.ineq_constraints(&v, &mut g0);
            for gi in &g0 {
                v.push((-gi).max(slack_floor));
            }
            v
        },
        lam: {
            let mut lam = vec![0.0; me + mi];
            if let Some(le) = &start.eq_multipliers {
                lam[..me].copy_from_slice(le);
            }
            if let Some(li) = &start.ineq_multipliers {
                lam[me..].copy_from_slice(li);
            }
            lam
        },
        z_lower: vec![0.0; nv],
        z_upper: vec![0.0; nv],
        lb,
        ub,
        n,
        me,
        mi,
    };

    let lower_active: Vec<bool> = it.lb.iter().map(|l| l.is_finite()).collect();
    let upper_active: Vec<bool> = it.ub.iter().map(|u| u.is_finite()).collect();

    // barrier parameter: from supplied multipliers when warm, else mu_init
    let mu_floor = opts.kkt_tolerance / 10.0;
    let mut mu = opts.mu_init;
    if let Some((zl, zu)) = &start.bound_multipliers {
        it.z_lower[..n].copy_from_slice(zl);
        it.z_upper[..n].copy_from_slice(zu);
    }
    if let Some(li) = &start.ineq_multipliers {
        // slack bound multipliers coincide with inequality multipliers
        for i in 0..mi {
            it.z_lower[n + i] = li[i].max(1e-8);
        }
    }
    if warm {
        let mut compl_sum = 0.0;
        let mut count = 0usize;
        for i in 0..nv {
            if it.lb[i].is_finite() && it.z_lower[i] > 0.0 {
                compl_sum += it.z_lower[i] * (it.v[i] - it.lb[i]);
                count += 1;
            }
            if it.ub[i].is_finite() && it.z_upper[i] > 0.0 {
                compl_sum += it.z_upper[i] * (it.ub[i] - it.v[i]);
                count += 1;
            }
        }
        if count > 0 {
            mu = (compl_sum / count as f64).clamp(mu_floor, opts.mu_init);
        }
    }
    // center the bound multipliers on the initial barrier parameter
    for i in 0..nv {
        if lower_active[i] {
            let centered = mu / (it.v[i] - it.lb[i]);
            if it.z_lower[i] <= 0.0 {
                it.z_lower[i] = centered.min(1e8);
            }
        } else {
            it.z_lower[i] = 0.0;
        }
        if upper_active[i] {
            let centered = mu / (it.ub[i] - it.v[i]);
            if it.z_upper[i] <= 0.0 {
                it.z_upper[i] = centered.min(1e8);
            }
        } else {
            it.z_upper[i] = 0.0;
        }
    }

    let (kkt, perm) = match build_kkt(problem) {
        Ok(k) => k,
        Err(e) => {
            return fail(
                SolveStatus::NumericalFailure,
                format!("KKT symbolic analysis failed: {e}"),
                None,
                0,
            )
        }
    };
    let dim = kkt.dim;
    let mut kkt_values = vec![0.0; kkt.rowidx.len()];

    let eq_pat = problem.eq_jac_pattern().clone();
    let ineq_pat = problem.ineq_jac_pattern().clone();
    let mut hess_vals = vec![0.0; problem.hess_pattern().nnz()];

    // Least-squares multiplier initialization for cold starts: solve the
    // KKT system with an identity Hessian block and zero constraint
    // residual, which minimizes |grad f + J^T lam| over lam.
    if !warm && me + mi > 0 {
        if let Ok(ev0) = evaluate(problem, &it) {
            let ones = vec![1.0; nv];
            kkt.fill_values(
                &vec![0.0; hess_vals.len()],
                &ev0.eq_jac,
                &ev0.ineq_jac,
                &ones,
                0.0,
                1e-8,
                &mut kkt_values,
            );
            if let Ok(factor) = kkt.symbolic.factor(&kkt_values) {
                let mut rhs = vec![0.0; dim];
                for i in 0..n {
                    rhs[perm[i]] = -ev0.grad[i];
                }
                factor.solve(&mut rhs);
                let lam_ls: Vec<f64> = (0..(me + mi)).map(|c| rhs[perm[nv + c]]).collect();
                if lam_ls.iter().all(|l| l.is_finite() && l.abs() <= 1e3) {
                    it.lam.copy_from_slice(&lam_ls);
                    // inequality multipliers must stay nonnegative
                    for c in me..(me + mi) {
                        it.lam[c] = it.lam[c].max(0.0);
                    }
                }
            }
        }
    }

    let mut nu = 1.0f64; // merit penalty weight
    let mut delta_w_last = 0.0f64;
    let mut best_primal = f64::INFINITY;
    let mut stagnant = 0usize;
    let mut stat_buf: Vec<f64> = Vec::new();

    let mut iterations = 0usize;
    loop {
        let ev = match evaluate(problem, &it) {
            Ok(ev) => ev,
            Err(msg) => return fail(SolveStatus::NumericalFailure, msg, Some(&it), iterations),
        };

        // stationarity: grad + J^T lam - z_lower + z_upper over v
        let mut res = residuals(&it, &ev, &mut stat_buf);
        for (k, (r, c)) in eq_pat.entries().enumerate() {
            stat_buf[c] += ev.eq_jac[k] * it.lam[r];
        }
        for (k, (r, c)) in ineq_pat.entries().enumerate() {
            stat_buf[c] += ev.ineq_jac[k] * it.lam[me + r];
        }
        for i in 0..mi {
            stat_buf[n + i] += it.lam[me + i];
        }
        for i in 0..nv {
            stat_buf[i] -= it.z_lower[i];
            stat_buf[i] += it.z_upper[i];
        }
        res.stationarity = norm_inf(&stat_buf);

        if opts.iteration_log {
            eprintln!(
                "iter {iterations:3}  f {:14.6e}  stat {:9.2e}  feas {:9.2e}  compl {:9.2e}  mu {:8.1e}",
                ev.f, res.stationarity, res.primal_feasibility, res.complementarity, mu
            );
        }

        if res.max() <= opts.kkt_tolerance {
            return SolveResult {
                status: SolveStatus::Optimal,
                x: it.v[..n].to_vec(),
                objective: ev.f,
                eq_multipliers: it.lam[..me].to_vec(),
                ineq_multipliers: it.lam[me..].to_vec(),
                bound_multipliers_lower: it.z_lower[..n].to_vec(),
                bound_multipliers_upper: it.z_upper[..n].to_vec(),
                ineq_slacks: it.v[n..].to_vec(),
                kkt: res,
                iterations,
                wall_time_s: t0.elapsed().as_secs_f64(),
                message: String::new(),
            };
        }
        if iterations >= opts.max_iterations {
            return fail(
                SolveStatus::MaxIterations,
                format!("stopped after {iterations} iterations, KKT max {:.3e}", res.max()),
                Some(&it),
                iterations,
            );
        }

        // infeasibility watchdog: primal residual stagnating above tolerance
        if res.primal_feasibility > opts.kkt_tolerance.max(1e-7) {
            if res.primal_feasibility > 0.9 * best_primal {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
            if res.primal_feasibility < best_primal {
                best_primal = res.primal_feasibility;
            }
            if stagnant >= opts.stagnation_window {
                return fail(
                    SolveStatus::Infeasible,
                    format!(
                        "primal residual stagnated at {:.3e} for {} iterations",
                        res.primal_feasibility, stagnant
                    ),
                    Some(&it),
                    iterations,
                );
            }
        } else {
            stagnant = 0;
        }

        // monotone barrier reduction once the mu-problem is solved
        let compl_mu = {
            let mut cm = 0.0f64;
            for i in 0..nv {
                if lower_active[i] {
                    cm = cm.max((it.z_lower[i] * (it.v[i] - it.lb[i]) - mu).abs());
                }
                if upper_active[i] {
                    cm = cm.max((it.z_upper[i] * (it.ub[i] - it.v[i]) - mu).abs());
                }
            }
            cm
        };
        let e_mu = res.stationarity.max(res.primal_feasibility).max(compl_mu);
        if e_mu <= opts.mu_accept_factor * mu && mu > mu_floor {
            mu = (opts.mu_shrink * mu).max(mu_floor);
        }

        // Hessian of the Lagrangian
        problem.hess_values(&it.v[..n], 1.0, &it.lam[..me], &it.lam[me..], &mut hess_vals);
        if hess_vals.iter().any(|v| !v.is_finite()) {
            return fail(
                SolveStatus::NumericalFailure,
                "Lagrangian Hessian returned a non-finite value".into(),
                Some(&it),
                iterations,
            );
        }

        // primal-dual barrier diagonal
        let mut sigma = vec![0.0; nv];
        for i in 0..nv {
            if lower_active[i] {
                sigma[i] += it.z_lower[i] / (it.v[i] - it.lb[i]);
            }
            if upper_active[i] {
                sigma[i] += it.z_upper[i] / (it.ub[i] - it.v[i]);
            }
        }

        // inertia-corrected factorization
        let mut delta_w = 0.0;
        let factor = loop {
            kkt.fill_values(
                &hess_vals,
                &ev.eq_jac,
                &ev.ineq_jac,
                &sigma,
                delta_w,
                opts.reg_dual,
                &mut kkt_values,
            );
            match kkt.symbolic.factor(&kkt_values) {
                Ok(f) if f.n_positive == nv && f.n_negative == me + mi => break f,
                _ => {
                    delta_w = if delta_w == 0.0 {
                        if delta_w_last == 0.0 {
                            1e-4
                        } else {
                            (delta_w_last / 3.0).max(opts.reg_init)
                        }
                    } else if delta_w_last == 0.0 {
                        delta_w * 100.0
                    } else {
                        delta_w * 8.0
                    };
                    if delta_w > opts.reg_max {
                        return fail(
                            SolveStatus::NumericalFailure,
                            format!("KKT factorization failed at regularization {delta_w:.1e}"),
                            Some(&it),
                            iterations,
                        );
                    }
                }
            }
        };
        if delta_w > 0.0 {
            delta_w_last = delta_w;
        }

        // Newton right-hand side: -[grad_phi + J^T lam; C]
        let mut rhs = vec![0.0; dim];
        for i in 0..nv {
            let mut r = if i < n { ev.grad[i] } else { 0.0 };
            if lower_active[i] {
                r -= mu / (it.v[i] - it.lb[i]);
            }
            if upper_active[i] {
                r += mu / (it.ub[i] - it.v[i]);
            }
            rhs[perm[i]] = -r;
        }
        for (k, (r, c)) in eq_pat.entries().enumerate() {
            rhs[perm[c]] -= ev.eq_jac[k] * it.lam[r];
        }
        for (k, (r, c)) in ineq_pat.entries().enumerate() {
            rhs[perm[c]] -= ev.ineq_jac[k] * it.lam[me + r];
        }
        for i in 0..mi {
            rhs[perm[n + i]] -= it.lam[me + i];
        }
        for cidx in 0..(me + mi) {
            rhs[perm[nv + cidx]] = -ev.c[cidx];
        }

        let mut sol = rhs.clone();
        factor.solve(&mut sol);
        // one step of iterative refinement
        {
            let mut kx = vec![0.0; dim];
            kkt.mul_sym(&kkt_values, &sol, &mut kx);
            let mut resid = vec![0.0; dim];
            for i in 0..dim {
                resid[i] = rhs[i] - kx[i];
            }
            factor.solve(&mut resid);
            for i in 0..dim {
                sol[i] += resid[i];
            }
        }
        if sol.iter().any(|v| !v.is_finite()) {
            return fail(
                SolveStatus::NumericalFailure,
                "KKT solve produced a non-finite step".into(),
                Some(&it),
                iterations,
            );
        }

        let mut dv = vec![0.0; nv];
        for i in 0..nv {
            dv[i] = sol[perm[i]];
        }
        let mut dlam = vec![0.0; me + mi];
        for c in 0..(me + mi) {
            dlam[c] = sol[perm[nv + c]];
        }

        // bound-multiplier steps
        let mut dz_lower = vec![0.0; nv];
        let mut dz_upper = vec![0.0; nv];
        for i in 0..nv {
            if lower_active[i] {
                let gap = it.v[i] - it.lb[i];
                dz_lower[i] = mu / gap - it.z_lower[i] - it.z_lower[i] / gap * dv[i];
            }
            if upper_active[i] {
                let gap = it.ub[i] - it.v[i];
                dz_upper[i] = mu / gap - it.z_upper[i] + it.z_upper[i] / gap * dv[i];
            }
        }

        let tau = 0.99f64.max(1.0 - mu);
        let alpha_max = fraction_to_boundary(&it.v, &dv, &it.lb, &it.ub, tau);
        let alpha_z = dual_fraction_to_boundary(&it.z_lower, &dz_lower, &lower_active, tau)
            .min(dual_fraction_to_boundary(&it.z_upper, &dz_upper, &upper_active, tau));

        // l1 merit line search
        let lam_inf = norm_inf(&it.lam).max(norm_inf(&dlam));
        nu = nu.max(1.1 * lam_inf + 1.0);
        let c_norm1: f64 = ev.c.iter().map(|v| v.abs()).sum();
        let phi0 = barrier_objective(&it, ev.f, mu) + nu * c_norm1;
        // directional derivative of the barrier part
        let mut dphi = 0.0;
        for i in 0..nv {
            let mut gi = if i < n { ev.grad[i] } else { 0.0 };
            if lower_active[i] {
                gi -= mu / (it.v[i] - it.lb[i]);
            }
            if upper_active[i] {
                gi += mu / (it.ub[i] - it.v[i]);
            }
            dphi += gi * dv[i];
        }
        dphi -= nu * c_norm1;

        let mut alpha = alpha_max;
        let mut accepted = false;
        let mut trial = it.v.clone();
        for _ in 0..opts.max_backtracks {
            for i in 0..nv {
                trial[i] = it.v[i] + alpha * dv[i];
            }
            let x_trial = &trial[..n];
            let f_trial = problem.objective(x_trial);
            let mut c_eq_t = vec![0.0; me];
            problem.eq_constraints(x_trial, &mut c_eq_t);
            let mut g_t = vec![0.0; mi];
            problem.ineq_constraints(x_trial, &mut g_t);
            let finite = f_trial.is_finite()
                && c_eq_t.iter().all(|v| v.is_finite())
                && g_t.iter().all(|v| v.is_finite());
            if finite {
                let mut c1: f64 = c_eq_t.iter().map(|v| v.abs()).sum();
                for i in 0..mi {
                    c1 += (g_t[i] + trial[n + i]).abs();
                }
                let phi_trial = {
                    let it_trial = Iterate {
                        v: trial.clone(),
                        lam: it.lam.clone(),
                        z_lower: it.z_lower.clone(),
                        z_upper: it.z_upper.clone(),
                        lb: it.lb.clone(),
                        ub: it.ub.clone(),
                        n,
                        me,
                        mi,
                    };
                    barrier_objective(&it_trial, f_trial, mu) + nu * c1
                };
                if phi_trial <= phi0 + opts.armijo * alpha * dphi || dphi >= 0.0 {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // a vanishing step: treat as numerical failure
            return fail(
                SolveStatus::NumericalFailure,
                "merit line search failed to find an acceptable step".into(),
                Some(&it),
                iterations,
            );
        }

        for i in 0..nv {
            it.v[i] += alpha * dv[i];
        }
        for c in 0..(me + mi) {
            it.lam[c] += alpha * dlam[c];
        }
        for i in 0..nv {
            it.z_lower[i] += alpha_z * dz_lower[i];
            it.z_upper[i] += alpha_z * dz_upper[i];
        }
        // multiplier safeguard: keep z within a large box around mu/gap
        const KAPPA_SIGMA: f64 = 1e10;
        for i in 0..nv {
            if lower_active[i] {
                let gap = it.v[i] - it.lb[i];
                it.z_lower[i] =
                    it.z_lower[i].clamp(mu / (KAPPA_SIGMA * gap), KAPPA_SIGMA * mu / gap);
                debug_assert!(gap > 0.0, "iterate left the lower-bound interior");
            }
            if upper_active[i] {
                let gap = it.ub[i] - it.v[i];
                it.z_upper[i] =
                    it.z_upper[i].clamp(mu / (KAPPA_SIGMA * gap), KAPPA_SIGMA * mu / gap);
                debug_assert!(gap > 0.0, "iterate left the upper-bound interior");
            }
        }
        debug_assert!(it.v[n..].iter().all(|&s| s > 0.0), "slack left the interior");

        iterations += 1;
    }
}
