//! Dense interior-point solvers for the two convex shapes the beamforming
//! problems reduce to: a small Hermitian SDP with affine LMI blocks, and a
//! convex complex QCQP.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMatrix, ONE, ZERO};

pub const SDP_GAP_TOL: f64 = 1e-7;
pub const SDP_MU_REDUCTION: f64 = 0.2;
pub const MAX_OUTER: usize = 200;

const MAX_CENTERING: usize = 100;
const PHASE1_RADIUS_SQ: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConicStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct ConicReport<T> {
    pub solution: T,
    pub objective: f64,
    /// A lower bound (minimization) or upper bound (maximization) on the optimum.
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: ConicStatus,
    /// `(primal, dual)` after every outer iteration.
    pub history: Vec<(f64, f64)>,
}

impl<T> ConicReport<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == ConicStatus::Optimal
    }

    /// Converts a non-optimal status into the matching error.
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            ConicStatus::Optimal => Ok(self),
            ConicStatus::Infeasible => Err(Error::Infeasible("no strictly feasible point".into())),
            ConicStatus::MaxIter => Err(Error::MaxIter(self.iterations)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
}

/// Objective `Re Tr(C W̄) + t_coef · t`.
#[derive(Debug, Clone)]
pub struct SdpObjective {
    pub sense: Sense,
    pub w_coef: CMatrix,
    pub t_coef: f64,
}

/// `block[row, col] += Tr(coef · W̄)`. Only `row <= col` is given; the lower
/// triangle is filled with conjugates.
#[derive(Debug, Clone)]
pub struct LmiTerm {
    pub row: usize,
    pub col: usize,
    pub coef: CMatrix,
}

/// Affine Hermitian block `constant + t · t_coef + Σ terms ⪰ 0`.
#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub constant: CMatrix,
    pub t_coef: CMatrix,
    pub terms: Vec<LmiTerm>,
}

impl LmiBlock {
    pub fn size(&self) -> usize {
        self.constant.nrows()
    }
}

/// `Re Tr(coef · W̄) (≤ | ≥) bound`.
#[derive(Debug, Clone)]
pub struct TraceConstraint {
    pub coef: CMatrix,
    pub relation: Relation,
    pub bound: f64,
}

/// Variables: Hermitian `W̄ ⪰ 0` of side `dim` (may be 0) and a free scalar `t`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub dim: usize,
    pub objective: SdpObjective,
    pub lmi_blocks: Vec<LmiBlock>,
    pub trace_constraints: Vec<TraceConstraint>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub w_bar: CMatrix,
    pub t: f64,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        let herm = |m: &CMatrix, what: &str| -> Result<()> {
            if !linalg::is_hermitian(m, 1e-12) {
                return Err(Error::InvalidInput(format!("{what} is not Hermitian")));
            }
            Ok(())
        };
        if self.objective.w_coef.shape() != (n, n) {
            return Err(Error::InvalidInput("objective coefficient has wrong shape".into()));
        }
        herm(&self.objective.w_coef, "objective coefficient")?;
        for blk in &self.lmi_blocks {
            let s = blk.size();
            if blk.constant.shape() != (s, s) || blk.t_coef.shape() != (s, s) {
                return Err(Error::InvalidInput("LMI block shapes disagree".into()));
            }
            herm(&blk.constant, "LMI constant")?;
            herm(&blk.t_coef, "LMI t coefficient")?;
            for term in &blk.terms {
                if term.row > term.col || term.col >= s || term.coef.shape() != (n, n) {
                    return Err(Error::InvalidInput("LMI term out of range".into()));
                }
                if term.row == term.col {
                    herm(&term.coef, "diagonal LMI coefficient")?;
                }
            }
        }
        for tc in &self.trace_constraints {
            if tc.coef.shape() != (n, n) {
                return Err(Error::InvalidInput("trace constraint has wrong shape".into()));
            }
            herm(&tc.coef, "trace constraint coefficient")?;
        }
        Ok(())
    }

    fn var_count(&self) -> usize {
        self.dim * self.dim + 1
    }

    /// Real basis of the Hermitian `dim × dim` matrices.
    fn basis(&self) -> Vec<CMatrix> {
        let n = self.dim;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, i)] = ONE;
            out.push(e);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut re = CMatrix::zeros(n, n);
                re[(i, j)] = ONE;
                re[(j, i)] = ONE;
                out.push(re);
                let mut im = CMatrix::zeros(n, n);
                im[(i, j)] = c(0.0, 1.0);
                im[(j, i)] = c(0.0, -1.0);
                out.push(im);
            }
        }
        out
    }

    /// Lowers the problem to `min cᵀx` over affine LMIs in real variables.
    fn lower(&self) -> (Vec<AffineLmi>, DVector<f64>, Vec<CMatrix>) {
        let n = self.dim;
        let nv = self.var_count();
        let t_idx = nv - 1;
        let basis = self.basis();
        let sign = match self.objective.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = DVector::zeros(nv);
        for (k, b) in basis.iter().enumerate() {
            cost[k] = sign * tr_prod(&self.objective.w_coef, b).re;
        }
        cost[t_idx] = sign * self.objective.t_coef;

        let mut lmis = Vec::new();
        if n > 0 {
            let terms = basis.iter().enumerate().map(|(k, b)| (k, b.clone())).collect();
            lmis.push(AffineLmi { g0: CMatrix::zeros(n, n), terms });
        }
        for blk in &self.lmi_blocks {
            let s = blk.size();
            let mut terms = Vec::new();
            for (k, b) in basis.iter().enumerate() {
                let mut g = CMatrix::zeros(s, s);
                for term in &blk.terms {
                    let v = tr_prod(&term.coef, b);
                    if term.row == term.col {
                        g[(term.row, term.row)] += cr(v.re);
                    } else {
                        g[(term.row, term.col)] += v;
                        g[(term.col, term.row)] += v.conj();
                    }
                }
                if linalg::max_abs(&g) > 0.0 {
                    terms.push((k, g));
                }
            }
            if linalg::max_abs(&blk.t_coef) > 0.0 {
                terms.push((t_idx, blk.t_coef.clone()));
            }
            lmis.push(AffineLmi { g0: blk.constant.clone(), terms });
        }
        for tc in &self.trace_constraints {
            let sgn = match tc.relation {
                Relation::LessEq => -1.0,
                Relation::GreaterEq => 1.0,
            };
            let mut terms = Vec::new();
            for (k, b) in basis.iter().enumerate() {
                let v = sgn * tr_prod(&tc.coef, b).re;
                if v != 0.0 {
                    terms.push((k, CMatrix::from_element(1, 1, cr(v))));
                }
            }
            lmis.push(AffineLmi { g0: CMatrix::from_element(1, 1, cr(-sgn * tc.bound)), terms });
        }
        (lmis, cost, basis)
    }
}

fn tr_prod(a: &CMatrix, b: &CMatrix) -> num_complex::Complex64 {
    // Tr(AB) = Σ_ij A_ij B_ji
    let mut s = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// `G(x) = g0 + Σ x_k G_k`, required to be positive definite.
#[derive(Debug, Clone)]
struct AffineLmi {
    g0: CMatrix,
    terms: Vec<(usize, CMatrix)>,
}

impl AffineLmi {
    fn eval(&self, x: &DVector<f64>) -> CMatrix {
        let mut g = self.g0.clone();
        for (k, gk) in &self.terms {
            if x[*k] != 0.0 {
                g += gk * cr(x[*k]);
            }
        }
        g
    }

    fn size(&self) -> usize {
        self.g0.nrows()
    }
}

struct Barrier<'a> {
    lmis: &'a [AffineLmi],
    cost: &'a DVector<f64>,
    /// Caps `‖x‖²` (phase I only).
    radius_sq: Option<f64>,
}

impl Barrier<'_> {
    fn nu(&self) -> f64 {
        self.lmis.iter().map(|l| l.size()).sum::<usize>() as f64 + self.radius_sq.map_or(0.0, |_| 1.0)
    }

    /// Barrier value `−Σ logdet G(x) − log(R − ‖x‖²)`, or `None` outside the domain.
    fn phi(&self, x: &DVector<f64>) -> Option<f64> {
        let mut v = 0.0;
        for l in self.lmis {
            v -= linalg::logdet_hermitian(&linalg::hermitian_part(&l.eval(x))).ok()?;
        }
        if let Some(r) = self.radius_sq {
            let slack = r - x.norm_squared();
            if slack <= 0.0 {
                return None;
            }
            v -= slack.ln();
        }
        Some(v)
    }

    fn grad_hess(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let nv = x.len();
        let mut g = DVector::zeros(nv);
        let mut h = DMatrix::zeros(nv, nv);
        for l in self.lmis {
            let ginv = linalg::inverse_hpd(&linalg::hermitian_part(&l.eval(x)))?;
            let ys: Vec<(usize, CMatrix)> = l.terms.iter().map(|(k, gk)| (*k, &ginv * gk)).collect();
            for (a, (ka, ya)) in ys.iter().enumerate() {
                g[*ka] -= linalg::trace(ya).re;
                for (kb, yb) in ys.iter().skip(a) {
                    let v = tr_prod(ya, yb).re;
                    h[(*ka, *kb)] += v;
                    if ka != kb {
                        h[(*kb, *ka)] += v;
                    }
                }
            }
        }
        if let Some(r) = self.radius_sq {
            let slack = r - x.norm_squared();
            g += x * (2.0 / slack);
            h += DMatrix::identity(nv, nv) * (2.0 / slack) + (x * x.transpose()) * (4.0 / (slack * slack));
        }
        Ok((g, h))
    }

    /// Newton centering of `t·cᵀx + φ(x)`; returns Newton steps taken.
    fn center(&self, x: &mut DVector<f64>, t: f64, stop: &dyn Fn(&DVector<f64>) -> bool) -> Result<usize> {
        let f = |y: &DVector<f64>| self.phi(y).map(|p| t * self.cost.dot(y) + p);
        let mut steps = 0;
        for _ in 0..MAX_CENTERING {
            if stop(x) {
                break;
            }
            let (gb, mut h) = self.grad_hess(x)?;
            let grad = self.cost * t + gb;
            let reg = 1e-14 * (1.0 + h.diagonal().amax());
            for i in 0..h.nrows() {
                h[(i, i)] += reg;
            }
            let dx = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => h.lu().solve(&(-&grad)).ok_or_else(|| Error::Numerical("singular barrier Hessian".into()))?,
            };
            let decrement = -grad.dot(&dx);
            if decrement / 2.0 <= 1e-10 {
                break;
            }
            steps += 1;
            let f0 = f(x).ok_or_else(|| Error::Numerical("iterate left the barrier domain".into()))?;
            let mut s = 1.0;
            loop {
                let y = &*x + &dx * s;
                if let Some(fy) = f(&y) {
                    if fy <= f0 - 0.25 * s * decrement {
                        *x = y;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-16 {
                    return Ok(steps);
                }
            }
        }
        Ok(steps)
    }
}

/// Largest `s` with `G(x) + s I ⪰ 0` violated, i.e. `max(−λ_min)` over all blocks.
fn worst_violation(lmis: &[AffineLmi], x: &DVector<f64>) -> f64 {
    lmis.iter().map(|l| -linalg::hermitian_eigen(&l.eval(x)).0[0]).fold(f64::NEG_INFINITY, f64::max)
}

struct PhaseOne {
    x: DVector<f64>,
    slack: f64,
    iterations: usize,
}

/// Minimizes `s` subject to `G(x) + s I ⪰ 0`, `s ≥ −1`, stopping as soon as `s < 0`.
fn sdp_phase_one(lmis: &[AffineLmi], nv: usize) -> Result<PhaseOne> {
    let x0 = DVector::zeros(nv);
    let viol = worst_violation(lmis, &x0);
    if viol < 0.0 {
        return Ok(PhaseOne { x: x0, slack: viol, iterations: 0 });
    }
    let s_idx = nv;
    let mut aug: Vec<AffineLmi> = lmis
        .iter()
        .map(|l| {
            let mut terms = l.terms.clone();
            terms.push((s_idx, linalg::eye(l.size())));
            AffineLmi { g0: l.g0.clone(), terms }
        })
        .collect();
    aug.push(AffineLmi {
        g0: CMatrix::from_element(1, 1, ONE),
        terms: vec![(s_idx, CMatrix::from_element(1, 1, ONE))],
    });
    let mut cost = DVector::zeros(nv + 1);
    cost[s_idx] = 1.0;
    let mut z = DVector::zeros(nv + 1);
    z[s_idx] = viol + 1.0;
    let barrier = Barrier { lmis: &aug, cost: &cost, radius_sq: Some(PHASE1_RADIUS_SQ.max(viol * viol)) };
    let nu = barrier.nu();
    let mut t = 1.0;
    let mut iterations = 0;
    let stop = |z: &DVector<f64>| z[s_idx] < 0.0;
    for _ in 0..MAX_OUTER {
        iterations += barrier.center(&mut z, t, &stop)?;
        if stop(&z) || nu / t <= 1e-10 {
            break;
        }
        t /= SDP_MU_REDUCTION;
    }
    let x = z.rows(0, nv).into_owned();
    let slack = worst_violation(lmis, &x);
    Ok(PhaseOne { x, slack, iterations })
}

/// Barrier-method SDP solve; `tol` is the relative duality-gap target.
pub fn solve_sdp(p: &SdpProblem, tol: f64) -> Result<ConicReport<SdpSolution>> {
    p.validate()?;
    let (lmis, cost, basis) = p.lower();
    let nv = p.var_count();
    let assemble = |x: &DVector<f64>| {
        let mut w = CMatrix::zeros(p.dim, p.dim);
        for (k, b) in basis.iter().enumerate() {
            w += b * cr(x[k]);
        }
        SdpSolution { w_bar: w, t: x[nv - 1] }
    };
    let sign = match p.objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let phase1 = sdp_phase_one(&lmis, nv)?;
    if phase1.slack >= 0.0 {
        let value = sign * cost.dot(&phase1.x);
        return Ok(ConicReport {
            solution: assemble(&phase1.x),
            objective: value,
            dual_objective: f64::NAN,
            duality_gap: f64::INFINITY,
            iterations: phase1.iterations,
            status: ConicStatus::Infeasible,
            history: Vec::new(),
        });
    }

    let barrier = Barrier { lmis: &lmis, cost: &cost, radius_sq: None };
    let nu = barrier.nu();
    let mut x = phase1.x;
    let mut t = nu / cost.dot(&x).abs().max(1.0);
    let mut iterations = phase1.iterations;
    let mut history = Vec::new();
    let mut status = ConicStatus::MaxIter;
    let never = |_: &DVector<f64>| false;
    for _ in 0..MAX_OUTER {
        iterations += barrier.center(&mut x, t, &never)?;
        let primal = cost.dot(&x);
        let gap = nu / t;
        history.push((sign * primal, sign * (primal - gap)));
        if gap <= tol * primal.abs().max(1.0) {
            status = ConicStatus::Optimal;
            break;
        }
        t /= SDP_MU_REDUCTION;
    }
    let primal = cost.dot(&x);
    let gap = nu / t;
    Ok(ConicReport {
        solution: assemble(&x),
        objective: sign * primal,
        dual_objective: sign * (primal - gap),
        duality_gap: gap,
        iterations,
        status,
        history,
    })
}

/// `xᴴ A x + 2 Re(bᴴ x) + c`.
#[derive(Debug, Clone)]
pub struct QuadForm {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: f64,
}

impl QuadForm {
    pub fn eval(&self, x: &CMatrix) -> f64 {
        linalg::quad_form(&self.a, x) + 2.0 * linalg::inner(&self.b, x).re + self.c
    }

    /// `∂/∂x*`: `A x + b`.
    pub fn gradient(&self, x: &CMatrix) -> CMatrix {
        &self.a * x + &self.b
    }
}

/// Minimize `objective(x)` subject to every `constraint(x) ≤ 0`.
#[derive(Debug, Clone)]
pub struct QcqpProblem {
    pub dim: usize,
    pub objective: QuadForm,
    pub constraints: Vec<QuadForm>,
}

impl QcqpProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        for (i, q) in std::iter::once(&self.objective).chain(&self.constraints).enumerate() {
            if q.a.shape() != (n, n) || q.b.shape() != (n, 1) {
                return Err(Error::InvalidInput(format!("quadratic form {i} has wrong shape")));
            }
            if !linalg::is_hermitian(&q.a, 1e-10) {
                return Err(Error::InvalidInput(format!("quadratic form {i} is not Hermitian")));
            }
            let (vals, _) = linalg::hermitian_eigen(&q.a);
            let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if n > 0 && vals[0] < -1e-9 * scale.max(1.0) {
                return Err(Error::InvalidInput(format!("quadratic form {i} is not convex")));
            }
        }
        Ok(())
    }

    /// Constraint values at `x`.
    pub fn constraint_values(&self, x: &CMatrix) -> Vec<f64> {
        self.constraints.iter().map(|q| q.eval(x)).collect()
    }

    /// Lagrange dual `inf_x objective + Σ λ_i constraint_i`.
    pub fn dual_value(&self, lambda: &[f64]) -> f64 {
        let (rp, rq, rc) = self.lagrangian_parts(lambda);
        dual_from_parts(&rp, &rq, rc)
    }

    fn lagrangian_parts(&self, lambda: &[f64]) -> (DMatrix<f64>, DVector<f64>, f64) {
        let obj = RealQuad::lift(&self.objective);
        let mut p = obj.p;
        let mut q = obj.q;
        let mut c = obj.r;
        for (l, qf) in lambda.iter().zip(&self.constraints) {
            let rq = RealQuad::lift(qf);
            p += rq.p * *l;
            q += rq.q * *l;
            c += rq.r * l;
        }
        (p, q, c)
    }
}

fn dual_from_parts(p: &DMatrix<f64>, q: &DVector<f64>, c: f64) -> f64 {
    let n = p.nrows();
    let scale = p.diagonal().amax().max(1e-300);
    let mut reg = p.clone();
    for i in 0..n {
        reg[(i, i)] += 1e-15 * scale;
    }
    match reg.cholesky() {
        Some(ch) => {
            let y = ch.solve(q);
            let candidate = c - q.dot(&y);
            // Guard against a nearly singular Lagrangian whose minimum is unbounded.
            let resid = p * &y - q;
            if resid.norm() <= 1e-8 * (1.0 + q.norm()) {
                candidate
            } else {
                f64::NEG_INFINITY
            }
        }
        None => f64::NEG_INFINITY,
    }
}

/// Real quadratic `yᵀ P y + 2 qᵀ y + r` on `y = [Re x; Im x]`.
#[derive(Debug, Clone)]
struct RealQuad {
    p: DMatrix<f64>,
    q: DVector<f64>,
    r: f64,
}

impl RealQuad {
    fn lift(f: &QuadForm) -> Self {
        let n = f.a.nrows();
        let mut p = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = f.a[(i, j)];
                p[(i, j)] = z.re;
                p[(i, j + n)] = -z.im;
                p[(i + n, j)] = z.im;
                p[(i + n, j + n)] = z.re;
            }
        }
        let p = (&p + p.transpose()) * 0.5;
        let mut q = DVector::zeros(2 * n);
        for i in 0..n {
            q[i] = f.b[(i, 0)].re;
            q[i + n] = f.b[(i, 0)].im;
        }
        Self { p, q, r: f.c }
    }

    fn eval(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.p * y)) + 2.0 * self.q.dot(y) + self.r
    }

    fn grad(&self, y: &DVector<f64>) -> DVector<f64> {
        (&self.p * y + &self.q) * 2.0
    }

    fn scaled(&self, s: f64) -> Self {
        Self { p: &self.p * s, q: &self.q * s, r: self.r * s }
    }

    /// Embeds into a space with one extra trailing coordinate.
    fn extend(&self) -> Self {
        let n = self.q.len();
        let mut p = DMatrix::zeros(n + 1, n + 1);
        p.view_mut((0, 0), (n, n)).copy_from(&self.p);
        let mut q = DVector::zeros(n + 1);
        q.rows_mut(0, n).copy_from(&self.q);
        Self { p, q, r: self.r }
    }
}

fn lower_complex(y: &DVector<f64>, n: usize) -> CMatrix {
    CMatrix::from_fn(n, 1, |i, _| c(y[i], y[i + n]))
}

fn lift_complex(x: &CMatrix) -> DVector<f64> {
    let n = x.nrows();
    DVector::from_fn(2 * n, |i, _| if i < n { x[(i, 0)].re } else { x[(i - n, 0)].im })
}

struct PdOutcome {
    y: DVector<f64>,
    lambda: DVector<f64>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Primal-dual interior-point method for a convex real QCQP.
///
/// `y0` must be strictly feasible. `early_stop` is checked after every step.
fn primal_dual(
    f0: &RealQuad,
    fs: &[RealQuad],
    y0: DVector<f64>,
    tol: f64,
    early_stop: &dyn Fn(&DVector<f64>) -> bool,
) -> Result<PdOutcome> {
    const MU: f64 = 10.0;
    const ALPHA: f64 = 0.01;
    const BETA: f64 = 0.5;
    let m = fs.len();
    let n = y0.len();
    let mut y = y0;
    let mut lambda = DVector::from_fn(m, |i, _| {
        let v = fs[i].eval(&y);
        (1.0 / -v).clamp(1e-8, 1e8)
    });
    let feas_tol = tol * (1.0 + f0.q.norm() + f0.p.norm());
    let mut history = Vec::new();

    let residual = |y: &DVector<f64>, lambda: &DVector<f64>, t: f64| -> Option<(DVector<f64>, DVector<f64>)> {
        let mut rd = f0.grad(y);
        let mut rc = DVector::zeros(m);
        for i in 0..m {
            let fi = fs[i].eval(y);
            if fi >= 0.0 {
                return None;
            }
            rd += fs[i].grad(y) * lambda[i];
            rc[i] = -lambda[i] * fi - 1.0 / t;
        }
        Some((rd, rc))
    };

    for it in 0..MAX_OUTER {
        if early_stop(&y) {
            return Ok(PdOutcome { y, lambda, iterations: it, converged: true, history });
        }
        let fv: Vec<f64> = fs.iter().map(|f| f.eval(&y)).collect();
        let eta: f64 = -(0..m).map(|i| fv[i] * lambda[i]).sum::<f64>();
        let (rd, _) = residual(&y, &lambda, 1.0).ok_or_else(|| Error::Numerical("lost strict feasibility".into()))?;
        let obj = f0.eval(&y);
        history.push(obj);
        if rd.norm() <= feas_tol && eta <= tol * obj.abs().max(1.0) {
            return Ok(PdOutcome { y, lambda, iterations: it, converged: true, history });
        }
        let t = if m == 0 { 1.0 } else { MU * m as f64 / eta.max(1e-300) };

        let grads: Vec<DVector<f64>> = fs.iter().map(|f| f.grad(&y)).collect();
        let mut h = &f0.p * 2.0;
        let mut rhs = -f0.grad(&y);
        for i in 0..m {
            h += &fs[i].p * (2.0 * lambda[i]);
            h += (&grads[i] * grads[i].transpose()) * (lambda[i] / -fv[i]);
            rhs += &grads[i] * (1.0 / (t * fv[i]));
        }
        let reg = 1e-14 * (1.0 + h.diagonal().amax());
        for i in 0..n {
            h[(i, i)] += reg;
        }
        let dy = match h.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => h.lu().solve(&rhs).ok_or_else(|| Error::Numerical("singular KKT system".into()))?,
        };
        let dl = DVector::from_fn(m, |i, _| -(lambda[i] * grads[i].dot(&dy) + lambda[i] * fv[i] + 1.0 / t) / fv[i]);

        let mut s_max: f64 = 1.0;
        for i in 0..m {
            if dl[i] < 0.0 {
                s_max = s_max.min(-lambda[i] / dl[i]);
            }
        }
        let mut s = 0.99 * s_max;
        let (rd0, rc0) = residual(&y, &lambda, t).expect("current iterate is strictly feasible");
        let r0 = (rd0.norm_squared() + rc0.norm_squared()).sqrt();
        loop {
            let yn = &y + &dy * s;
            let ln = &lambda + &dl * s;
            if let Some((rd1, rc1)) = residual(&yn, &ln, t) {
                let r1 = (rd1.norm_squared() + rc1.norm_squared()).sqrt();
                if r1 <= (1.0 - ALPHA * s) * r0 {
                    y = yn;
                    lambda = ln;
                    break;
                }
            }
            s *= BETA;
            if s < 1e-14 {
                // No progress possible at this precision.
                return Ok(PdOutcome { y, lambda, iterations: it, converged: false, history });
            }
        }
    }
    Ok(PdOutcome { y, lambda, iterations: MAX_OUTER, converged: false, history })
}

#[derive(Debug, Clone)]
pub struct QcqpSolution {
    pub x: CMatrix,
    /// One multiplier per constraint.
    pub multipliers: Vec<f64>,
}

/// Convex QCQP via its real lifting and a primal-dual interior-point method.
///
/// `tol` bounds both the surrogate duality gap (relative to `max(1, |obj|)`)
/// and the dual residual.
pub fn solve_qcqp(p: &QcqpProblem, tol: f64) -> Result<ConicReport<QcqpSolution>> {
    solve_qcqp_from(p, tol, None)
}

/// As [`solve_qcqp`], with an optional starting point for phase I.
pub fn solve_qcqp_from(p: &QcqpProblem, tol: f64, start: Option<&CMatrix>) -> Result<ConicReport<QcqpSolution>> {
    p.validate()?;
    let n = p.dim;
    let f0 = RealQuad::lift(&p.objective);
    let fs: Vec<RealQuad> = p.constraints.iter().map(RealQuad::lift).collect();
    let m = fs.len();

    let y_start = start.map_or_else(|| DVector::zeros(2 * n), lift_complex);
    let strictly = |y: &DVector<f64>| fs.iter().all(|f| f.eval(y) < 0.0);

    let mut iterations = 0;
    let y0 = if strictly(&y_start) {
        y_start
    } else {
        // Phase I over (y, s): normalized f_i(y) ≤ s, s ≥ −1, minimize s.
        let normed: Vec<RealQuad> =
            fs.iter().map(|f| f.scaled(1.0 / (1.0 + f.p.norm() + f.q.norm() + f.r.abs()))).collect();
        let worst = normed.iter().map(|f| f.eval(&y_start)).fold(f64::NEG_INFINITY, f64::max);
        let mut ext: Vec<RealQuad> = normed
            .iter()
            .map(|f| {
                let mut e = f.extend();
                e.q[2 * n] = -0.5;
                e
            })
            .collect();
        let mut floor =
            RealQuad::extend(&RealQuad { p: DMatrix::zeros(2 * n, 2 * n), q: DVector::zeros(2 * n), r: -1.0 });
        floor.q[2 * n] = -0.5;
        ext.push(floor);
        let mut obj = RealQuad::extend(&RealQuad { p: DMatrix::zeros(2 * n, 2 * n), q: DVector::zeros(2 * n), r: 0.0 });
        obj.q[2 * n] = 0.5;
        let mut z0 = DVector::zeros(2 * n + 1);
        z0.rows_mut(0, 2 * n).copy_from(&y_start);
        z0[2 * n] = (worst + 1.0).max(0.0) + 1.0;
        let stop = |z: &DVector<f64>| z[2 * n] < 0.0 && strictly(&z.rows(0, 2 * n).into_owned());
        let out = primal_dual(&obj, &ext, z0, 1e-10, &stop)?;
        iterations += out.iterations;
        let y = out.y.rows(0, 2 * n).into_owned();
        if !strictly(&y) {
            let x = lower_complex(&y, n);
            return Ok(ConicReport {
                objective: p.objective.eval(&x),
                solution: QcqpSolution { x, multipliers: vec![0.0; m] },
                dual_objective: f64::NAN,
                duality_gap: f64::INFINITY,
                iterations,
                status: ConicStatus::Infeasible,
                history: Vec::new(),
            });
        }
        y
    };

    let never = |_: &DVector<f64>| false;
    let out = primal_dual(&f0, &fs, y0, tol, &never)?;
    iterations += out.iterations;
    let x = lower_complex(&out.y, n);
    let multipliers: Vec<f64> = out.lambda.iter().copied().collect();
    let objective = p.objective.eval(&x);
    let dual = p.dual_value(&multipliers);
    let history = out.history.iter().map(|v| (*v, f64::NAN)).collect();
    Ok(ConicReport {
        solution: QcqpSolution { x, multipliers },
        objective,
        dual_objective: dual,
        duality_gap: objective - dual,
        iterations,
        status: if out.converged { ConicStatus::Optimal } else { ConicStatus::MaxIter },
        history,
    })
}
