//! Majorization-minimization solvers for the general case: extended
//! interference (single user, Lagrangian dual with a bisection on the power
//! multiplier) and multiple users (rate constraints linearized around the
//! current iterate, subproblem handed to the QCQP solver).
//!
//! Both rest on the same concave quadratic minorizer of the MI at `w₀`:
//! `h(w | w₀) = 2δ Re(wᴴ j₁) − δ² wᴴ J₃ w + const`.

use serde::Serialize;

use crate::conic::{self, ConicStatus, QcqpProblem, QuadForm};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix, ZERO};
use crate::model::{self, Beamformer, Instance};
use crate::solver_closed::feasibility_bound;

pub const EPS1: f64 = 1e-8;
pub const EPS2: f64 = 1e-6;
pub const MAX_ITER: usize = 2000;
/// Relative gap between `‖w(τ)‖²` and `P0` at which bisection may stop early.
pub const POWER_TOL: f64 = 1e-7;

const DEGENERATE_DEN: f64 = 1e-14;
const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 400;

/// Everything the minorizer at `w₀` needs.
#[derive(Debug, Clone)]
pub struct SurrogateParams {
    /// `M = I − δ Sᴴ W̃ᴴ T⁻¹ W̃ S`, `S = R_R^{1/2}`.
    pub m_mat: CMatrix,
    /// `B = T⁻¹ W̃ S`.
    pub b_mat: CMatrix,
    /// `J₁ = B M⁻¹ Sᴴ`.
    pub j1_full: CMatrix,
    /// `D = B M⁻¹ Bᴴ`, so that `J₂ = R_RC* ⊗ D`.
    pub d_mat: CMatrix,
    /// `j₁ = Fᵀ vec(J₁)*`.
    pub j1_vec: CMatrix,
    /// `J₃ = Fᵀ J₂* F`.
    pub j3: CMatrix,
    pub const_term: f64,
    pub delta: f64,
    /// `T = I + δ W̃ R_RC W̃ᴴ`.
    pub t_mat: CMatrix,
    pub r_rc: CMatrix,
    /// MI at `w₀`, nats.
    pub mi: f64,
    /// `vec(W₀)`.
    pub w_prev: CMatrix,
}

impl SurrogateParams {
    /// `h(w | w₀)` for a stacked `w̃ = vec(W)`.
    pub fn value(&self, w: &CMatrix) -> f64 {
        let d = self.delta;
        2.0 * d * linalg::inner(w, &self.j1_vec).re - d * d * linalg::quad_form(&self.j3, w) + self.const_term
    }

    /// `∂g/∂w*` at `w₀`, equal to the minorizer gradient there.
    pub fn gradient(&self) -> CMatrix {
        let d = self.delta;
        &self.j1_vec * cr(d) - &self.j3 * &self.w_prev * cr(d * d)
    }

    /// Dense `J₂ = R_RC* ⊗ D` (large; for checks only).
    pub fn j2(&self) -> CMatrix {
        linalg::kron(&self.r_rc.map(|z| z.conj()), &self.d_mat)
    }
}

/// Instance data shared by every surrogate evaluation.
#[derive(Debug, Clone)]
pub struct MmContext {
    pub sqrt_rr: CMatrix,
    pub r_rc: CMatrix,
    pub delta: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
}

impl MmContext {
    pub fn new(inst: &Instance) -> Result<Self> {
        let cfg = &inst.config;
        Ok(Self {
            sqrt_rr: linalg::hermitian_sqrt(&inst.r_target)?,
            r_rc: inst.r_sum(),
            delta: cfg.delta(),
            n_tx: cfg.n_tx,
            n_rx: cfg.n_rx,
            n_users: cfg.n_users,
        })
    }

    pub fn surrogate(&self, w_prev: &Beamformer) -> Result<SurrogateParams> {
        let (n_tx, n_rx, k) = (self.n_tx, self.n_rx, self.n_users);
        let w = &w_prev.w;
        if w.shape() != (n_tx, k) || w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("beamformer has wrong shape or non-finite entries".into()));
        }
        let delta = self.delta;
        let s = &self.sqrt_rr;
        let wt = model::w_tilde(w, n_rx);
        let t_mat =
            linalg::hermitian_part(&(linalg::eye(n_rx * k) + model::w_tilde_sandwich(w, &self.r_rc, n_rx) * cr(delta)));
        let ws = &wt * s;
        let l_t = linalg::cholesky(&t_mat)?;
        let b_mat = linalg::cholesky_solve(&l_t, &ws);
        let m_mat = linalg::hermitian_part(&(linalg::eye(s.nrows()) - ws.adjoint() * &b_mat * cr(delta)));
        let l_m = linalg::cholesky(&m_mat)
            .map_err(|e| Error::Numerical(format!("surrogate matrix M lost definiteness: {e}")))?;
        let logdet_m: f64 = (0..l_m.nrows()).map(|i| l_m[(i, i)].re.ln()).sum::<f64>() * 2.0;
        let minv_sh = linalg::cholesky_solve(&l_m, &s.adjoint());
        let minv_bh = linalg::cholesky_solve(&l_m, &b_mat.adjoint());
        let j1_full = &b_mat * minv_sh;
        let d_mat = linalg::hermitian_part(&(&b_mat * minv_bh));

        // j₁[n + k'N_T] = Σ_rb conj(J₁[rb·K + k', rb·N_T + n]).
        let mut j1_vec = CMatrix::zeros(n_tx * k, 1);
        for kk in 0..k {
            for n in 0..n_tx {
                let mut acc = ZERO;
                for rb in 0..n_rx {
                    acc += j1_full[(rb * k + kk, rb * n_tx + n)].conj();
                }
                j1_vec[(n + kk * n_tx, 0)] = acc;
            }
        }
        // J₃[(n,k),(n',k')] = Σ_{rb,rb'} R_RC[rb·N_T+n, rb'·N_T+n'] · conj(D[rb·K+k, rb'·K+k']).
        let dim = n_tx * k;
        let mut j3 = CMatrix::zeros(dim, dim);
        for kk in 0..k {
            for kp in 0..k {
                for n in 0..n_tx {
                    for np in 0..n_tx {
                        let mut acc = ZERO;
                        for rb in 0..n_rx {
                            for rbp in 0..n_rx {
                                acc += self.r_rc[(rb * n_tx + n, rbp * n_tx + np)]
                                    * d_mat[(rb * k + kk, rbp * k + kp)].conj();
                            }
                        }
                        j3[(n + kk * n_tx, np + kp * n_tx)] = acc;
                    }
                }
            }
        }
        let j3 = linalg::hermitian_part(&j3);
        let w_prev = w_prev.stacked();
        let mi = -logdet_m;
        let const_term =
            mi - 2.0 * delta * linalg::inner(&w_prev, &j1_vec).re + delta * delta * linalg::quad_form(&j3, &w_prev);
        Ok(SurrogateParams {
            m_mat,
            b_mat,
            j1_full,
            d_mat,
            j1_vec,
            j3,
            const_term,
            delta,
            t_mat,
            r_rc: self.r_rc.clone(),
            mi,
            w_prev,
        })
    }
}

pub fn surrogate(inst: &Instance, w_prev: &Beamformer) -> Result<SurrogateParams> {
    MmContext::new(inst)?.surrogate(w_prev)
}

/// Stationary point of the single-user Lagrangian for a fixed power multiplier.
#[derive(Debug, Clone)]
pub struct InnerPoint {
    pub w: CMatrix,
    pub mu: f64,
    /// `‖w‖²`; infinite when `τ = 0` and the right-hand side leaves the range of `δJ₃`.
    pub power: f64,
}

/// Solves `w(τ) = (δJ₃ + τI)^† (μ c + j₁)` in the eigenbasis of `δJ₃`, which is
/// computed once and reused for every `τ`.
pub struct InnerSolver {
    vals: Vec<f64>,
    vecs: CMatrix,
    j_hat: Vec<num_complex::Complex64>,
    c_hat: Vec<num_complex::Complex64>,
    omega_tilde: f64,
    null_tol: f64,
}

impl InnerSolver {
    /// `h` is the user channel, `Ω̃ = |hᴴw₀|² + Ω` the linearized rate threshold.
    pub fn new(sp: &SurrogateParams, h: &CMatrix, omega_tilde: f64) -> Self {
        let a = &sp.j3 * cr(sp.delta);
        let (vals, vecs) = linalg::hermitian_eigen(&a);
        let top = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let null_tol = linalg::PINV_CUTOFF * top;
        let vals: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
        let c = h * (h.adjoint() * &sp.w_prev);
        let j_hat = (vecs.adjoint() * &sp.j1_vec).iter().copied().collect();
        let c_hat = (vecs.adjoint() * c).iter().copied().collect();
        Self { vals, vecs, j_hat, c_hat, omega_tilde, null_tol }
    }

    fn weight(&self, i: usize, tau: f64) -> Option<f64> {
        let v = self.vals[i] + tau;
        if tau == 0.0 && self.vals[i] <= self.null_tol {
            None
        } else {
            Some(1.0 / v)
        }
    }

    pub fn solve(&self, tau: f64) -> Result<InnerPoint> {
        let n = self.vals.len();
        let mut cj = 0.0;
        let mut cc = 0.0;
        for i in 0..n {
            if let Some(a) = self.weight(i, tau) {
                cj += a * (self.c_hat[i].conj() * self.j_hat[i]).re;
                cc += a * self.c_hat[i].norm_sqr();
            }
        }
        let mu = if 2.0 * cj >= self.omega_tilde {
            0.0
        } else {
            let den = 2.0 * cc;
            if den <= DEGENERATE_DEN {
                return Err(Error::DegenerateConstraint(den));
            }
            (self.omega_tilde - 2.0 * cj) / den
        };
        let scale = self.j_hat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            + mu * self.c_hat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut y = CMatrix::zeros(n, 1);
        let mut unbounded = false;
        for i in 0..n {
            let rhs = self.j_hat[i] + self.c_hat[i] * mu;
            match self.weight(i, tau) {
                Some(a) => y[(i, 0)] = rhs * a,
                None => unbounded |= rhs.norm() > 1e-10 * scale.max(1e-300),
            }
        }
        let w = &self.vecs * &y;
        let power = if unbounded { f64::INFINITY } else { linalg::norm_sqr(&y) };
        Ok(InnerPoint { w, mu, power })
    }

    /// `w(τ)` on the dual path at `τ = 0`, treating a degenerate rate direction as unbounded.
    fn solve_at_zero(&self) -> Result<InnerPoint> {
        match self.solve(0.0) {
            Err(Error::DegenerateConstraint(_)) => {
                Ok(InnerPoint { w: CMatrix::zeros(self.vals.len(), 1), mu: 0.0, power: f64::INFINITY })
            }
            other => other,
        }
    }
}

pub fn inner_solve_dual(sp: &SurrogateParams, h: &CMatrix, omega_tilde: f64, tau: f64) -> Result<Beamformer> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput("tau must be >= 0".into()));
    }
    let p = InnerSolver::new(sp, h, omega_tilde).solve(tau)?;
    Ok(Beamformer::new(p.w))
}

#[derive(Debug, Clone)]
pub struct BisectResult {
    pub tau: f64,
    pub point: InnerPoint,
    pub iterations: usize,
    /// Final bracket `(τ_l, τ_u)`.
    pub bracket: (f64, f64),
}

/// Finds the power multiplier: `τ = 0` if that already meets the budget,
/// otherwise bisection on `f(τ) = ‖w(τ)‖²`, which is non-increasing.
pub fn bisect_tau(solver: &InnerSolver, p0: f64, eps1: f64) -> Result<BisectResult> {
    let at_zero = solver.solve_at_zero()?;
    if at_zero.power <= p0 {
        return Ok(BisectResult { tau: 0.0, point: at_zero, iterations: 0, bracket: (0.0, 0.0) });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_point = solver.solve(hi)?;
    let mut doublings = 0;
    while hi_point.power > p0 {
        lo = hi;
        hi *= 2.0;
        hi_point = solver.solve(hi)?;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::BracketFailure(format!("f(τ) > P0 up to τ = {hi:e}")));
        }
    }
    let mut iterations = 0;
    // Past the τ tolerance, keep going while f is steep enough that the budget is still missed.
    let done = |lo: f64, hi: f64, power: f64| {
        let gap = p0 - power;
        gap <= 1e-12 * p0 || (hi - lo <= eps1 && gap <= POWER_TOL * p0)
    };
    while !done(lo, hi, hi_point.power) && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = solver.solve(mid)?;
        if p.power > p0 {
            lo = mid;
        } else {
            hi = mid;
            hi_point = p;
        }
        iterations += 1;
    }
    Ok(BisectResult { tau: hi, point: hi_point, iterations, bracket: (lo, hi) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MmStatus {
    /// Relative MI change fell below the tolerance.
    Converged,
    /// The subproblem could not improve the minorizer; the previous iterate is kept.
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct MmReport {
    pub beamformer: Beamformer,
    /// MI in nats: the initial point, then one entry per accepted iteration.
    pub mi_trace: Vec<f64>,
    /// Normalized stationarity residual at the final iterate.
    pub kkt_residual: f64,
    /// Largest complementary-slackness product.
    pub complementarity: f64,
    pub iterations: usize,
    pub status: MmStatus,
    /// Power multiplier followed by one multiplier per rate constraint.
    pub multipliers: Vec<f64>,
}

impl MmReport {
    pub fn mi(&self) -> f64 {
        *self.mi_trace.last().expect("trace holds the initial point")
    }
}

#[derive(Debug, Clone)]
pub struct MmOptions {
    /// Relative MI-change stopping tolerance.
    pub eps: f64,
    pub max_iter: usize,
    /// Bisection tolerance on `τ` (single user).
    pub tau_tol: f64,
    /// Subproblem tolerance (multi-user).
    pub qcqp_tol: f64,
}

impl MmOptions {
    pub fn single_user() -> Self {
        Self { eps: EPS1, max_iter: MAX_ITER, tau_tol: EPS1, qcqp_tol: 1e-10 }
    }

    pub fn multi_user() -> Self {
        Self { eps: EPS2, max_iter: MAX_ITER, tau_tol: EPS1, qcqp_tol: 1e-10 }
    }
}

fn converged(old: f64, new: f64, eps: f64) -> bool {
    (new - old).abs() <= eps * old.abs().max(f64::MIN_POSITIVE)
}

/// Single-user MM with the closed-form dual inner solve.
pub fn algorithm1(inst: &Instance, opts: &MmOptions) -> Result<MmReport> {
    let cfg = &inst.config;
    if cfg.n_users != 1 {
        return Err(Error::InvalidInput("algorithm 1 handles exactly one user".into()));
    }
    let h = inst.user_channel(0);
    let omega = cfg.omega(0);
    let omega1 = feasibility_bound(&h, cfg.p0);
    if omega1 <= omega {
        return Err(Error::Infeasible(format!(
            "rate target needs channel gain {omega:.6e}, at most {omega1:.6e} is reachable"
        )));
    }
    let ctx = MmContext::new(inst)?;
    let mut w = &h * cr((cfg.p0 / linalg::norm_sqr(&h)).sqrt());
    let mut sp = ctx.surrogate(&Beamformer::new(w.clone()))?;
    let mut trace = vec![sp.mi];
    let mut status = MmStatus::MaxIter;
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let gain0 = linalg::inner(&h, &w).norm_sqr();
        let solver = InnerSolver::new(&sp, &h, gain0 + omega);
        let b = bisect_tau(&solver, cfg.p0, opts.tau_tol)?;
        iterations += 1;
        if sp.value(&b.point.w) < sp.value(&w) {
            status = MmStatus::Stalled;
            break;
        }
        w = b.point.w;
        let prev = sp.mi;
        sp = ctx.surrogate(&Beamformer::new(w.clone()))?;
        trace.push(sp.mi);
        if converged(prev, sp.mi, opts.eps) {
            status = MmStatus::Converged;
            break;
        }
    }
    // Multipliers of the subproblem around the final iterate; at a fixed point
    // they certify stationarity of the original problem in subproblem scale:
    // ∇g/δ − τ w + μ hhᴴ w = 0.
    let gain = linalg::inner(&h, &w).norm_sqr();
    let last = bisect_tau(&InnerSolver::new(&sp, &h, gain + omega), cfg.p0, opts.tau_tol)?;
    let (tau, mu) = (last.tau, last.point.mu);
    let grad = sp.gradient() * cr(1.0 / sp.delta);
    let hw = linalg::inner(&h, &w);
    let resid = &grad - &w * cr(tau) + &h * (hw * mu);
    let kkt_residual = linalg::norm_sqr(&resid).sqrt() / (1.0 + linalg::norm_sqr(&grad).sqrt());
    let complementarity = (tau * (linalg::norm_sqr(&w) - cfg.p0)).abs().max((mu * (omega - hw.norm_sqr())).abs());
    Ok(MmReport {
        beamformer: Beamformer::new(w),
        mi_trace: trace,
        kkt_residual,
        complementarity,
        iterations,
        status,
        multipliers: vec![tau, mu],
    })
}

/// `L_kj = (e_j e_jᵀ) ⊗ h_k h_kᴴ`: picks `|h_kᴴ w_j|²` out of `w̃ᴴ L_kj w̃`.
fn selector(inst: &Instance, k: usize, j: usize) -> CMatrix {
    let n = inst.config.n_users;
    let mut e = CMatrix::zeros(n, n);
    e[(j, j)] = cr(1.0);
    let h = inst.user_channel(k);
    linalg::kron(&e, &(&h * h.adjoint()))
}

/// `ν_k = 2^{r_k} − 1`.
fn sinr_target(inst: &Instance, k: usize) -> f64 {
    2f64.powf(inst.config.rate_targets[k]) - 1.0
}

/// Convex subproblem around `w₀`:
/// minimize `δ w̃ᴴ J₃ w̃ − 2Re(j₁ᴴ w̃)` s.t. `‖w̃‖² ≤ P0` and, per user,
/// `ν_k Σ_{j≠k} w̃ᴴ L_kj w̃ + ν_k σ_N² − 2Re(w̃₀ᴴ L_k w̃) + w̃₀ᴴ L_k w̃₀ ≤ 0`.
pub fn build_multiuser_subproblem(inst: &Instance, sp: &SurrogateParams) -> QcqpProblem {
    let cfg = &inst.config;
    let dim = cfg.n_tx * cfg.n_users;
    let objective = QuadForm { a: &sp.j3 * cr(sp.delta), b: -&sp.j1_vec, c: 0.0 };
    let mut constraints = vec![QuadForm { a: linalg::eye(dim), b: CMatrix::zeros(dim, 1), c: -cfg.p0 }];
    let w0 = &sp.w_prev;
    for k in 0..cfg.n_users {
        let nu = sinr_target(inst, k);
        let mut a = CMatrix::zeros(dim, dim);
        for j in (0..cfg.n_users).filter(|&j| j != k) {
            a += selector(inst, k, j) * cr(nu);
        }
        let lk = selector(inst, k, k);
        let lw = &lk * w0;
        let c = linalg::inner(w0, &lw).re + nu * cfg.sigma_n2;
        constraints.push(QuadForm { a, b: -lw, c });
    }
    QcqpProblem { dim, objective, constraints }
}

/// Zero-forcing start: interference-free directions, each user given its
/// minimum power plus an equal share of what is left.
pub fn zero_forcing_init(inst: &Instance) -> Result<Beamformer> {
    let cfg = &inst.config;
    let k = cfg.n_users;
    if k > cfg.n_tx {
        return Err(Error::InvalidInput("zero forcing needs n_users <= n_tx".into()));
    }
    let hmat = &inst.channel;
    let gram = hmat * hmat.adjoint();
    let dirs = hmat.adjoint()
        * linalg::inverse_hpd(&linalg::hermitian_part(&gram))
            .map_err(|_| Error::Infeasible("user channels are linearly dependent".into()))?;
    let mut w = CMatrix::zeros(cfg.n_tx, k);
    let mut p_min = Vec::with_capacity(k);
    for j in 0..k {
        let d = dirs.columns(j, 1).into_owned();
        let d = &d * cr(1.0 / linalg::norm_sqr(&d).sqrt());
        let g = linalg::inner(&inst.user_channel(j), &d).norm_sqr();
        p_min.push(sinr_target(inst, j) * cfg.sigma_n2 / g);
        w.set_column(j, &d.column(0));
    }
    let need: f64 = p_min.iter().sum();
    if need >= cfg.p0 {
        return Err(Error::Infeasible(format!(
            "zero forcing needs {need:.6e} W to meet the rate targets, budget is {:.6e} W",
            cfg.p0
        )));
    }
    let share = (cfg.p0 - need) / k as f64;
    for (j, p) in p_min.iter().enumerate() {
        w.column_mut(j).scale_mut((p + share).sqrt());
    }
    Ok(Beamformer::new(w))
}

/// Multi-user MM with linearized rate constraints.
pub fn algorithm2(inst: &Instance, opts: &MmOptions) -> Result<MmReport> {
    let cfg = &inst.config;
    let ctx = MmContext::new(inst)?;
    let mut bf = zero_forcing_init(inst)?;
    let mut sp = ctx.surrogate(&bf)?;
    let mut trace = vec![sp.mi];
    let mut status = MmStatus::MaxIter;
    let mut multipliers = vec![0.0; cfg.n_users + 1];
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        let prob = build_multiuser_subproblem(inst, &sp);
        let rep = conic::solve_qcqp_from(&prob, opts.qcqp_tol, Some(&sp.w_prev))?;
        iterations += 1;
        if rep.status == ConicStatus::Infeasible {
            return Err(Error::Infeasible(format!("subproblem at iteration {it} has no strictly feasible point")));
        }
        let x = rep.solution.x;
        if sp.value(&x) < sp.value(&sp.w_prev) {
            status = MmStatus::Stalled;
            break;
        }
        multipliers = rep.solution.multipliers;
        bf = Beamformer::from_stacked(&x, cfg.n_tx, cfg.n_users);
        let prev = sp.mi;
        sp = ctx.surrogate(&bf)?;
        trace.push(sp.mi);
        if converged(prev, sp.mi, opts.eps) {
            status = MmStatus::Converged;
            break;
        }
    }
    let (kkt_residual, complementarity) = multiuser_kkt(inst, &sp, &multipliers);
    Ok(MmReport { beamformer: bf, mi_trace: trace, kkt_residual, complementarity, iterations, status, multipliers })
}

/// Stationarity and complementarity of the original multi-user problem, in
/// subproblem scale, using the true (not linearized) constraint gradients.
fn multiuser_kkt(inst: &Instance, sp: &SurrogateParams, multipliers: &[f64]) -> (f64, f64) {
    let cfg = &inst.config;
    let w = &sp.w_prev;
    let grad = sp.gradient() * cr(1.0 / sp.delta);
    let mut resid = -&grad + w * cr(multipliers[0]);
    let mut comp = (multipliers[0] * (linalg::norm_sqr(w) - cfg.p0)).abs();
    for k in 0..cfg.n_users {
        let nu = sinr_target(inst, k);
        let mut a = -selector(inst, k, k);
        for j in (0..cfg.n_users).filter(|&j| j != k) {
            a += selector(inst, k, j) * cr(nu);
        }
        let lam = multipliers[k + 1];
        resid += (&a * w) * cr(lam);
        let value = linalg::quad_form(&a, w) + nu * cfg.sigma_n2;
        comp = comp.max((lam * value).abs());
    }
    let r = linalg::norm_sqr(&resid).sqrt() / (1.0 + linalg::norm_sqr(&grad).sqrt());
    (r, comp)
}
