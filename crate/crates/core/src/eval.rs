//! Evaluation artifacts: transmit beampatterns, Capon spectra, grid MLE of the
//! target angle, and MI / RMSE sweeps over power, rate or radar SNR.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix};
use crate::model::{self, dbm_to_watts, steering_vector, Beamformer, Echo, Instance, ScattererKind, SystemConfig};
use crate::solver_closed::{solve_closed_form, ClosedFormInputs};
use crate::solver_mm::{self, MmOptions, MmStatus};
use crate::solver_sdr::{self, SdrOptions};

pub const BEAM_STEP_DEG: f64 = 0.1;
pub const MLE_STEP_DEG: f64 = 0.05;
/// Capon diagonal loading as a fraction of `tr(R̂)/N_R`.
pub const CAPON_LOADING: f64 = 1e-3;
/// Floor for zero-power grid points so every dB value stays finite.
const DB_FLOOR: f64 = -300.0;

/// `lo, lo + step, …, hi`; the endpoints are hit exactly.
pub fn angle_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad angle grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step).round() as usize;
    if n == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect())
}

/// `[−90°, 90°]` at the given step.
pub fn full_grid(step: f64) -> Vec<f64> {
    angle_grid(-90.0, 90.0, step).expect("positive step")
}

/// Spectrum over an angle grid, in dB relative to its own peak.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumResult {
    pub fn from_power(angles: Vec<f64>, power: &[f64]) -> Self {
        let peak = power.iter().cloned().fold(0.0_f64, f64::max);
        let values = power
            .iter()
            .map(|&p| {
                if peak > 0.0 && p > 0.0 {
                    (10.0 * (p / peak).log10()).max(DB_FLOOR)
                } else if peak > 0.0 {
                    DB_FLOOR
                } else {
                    0.0
                }
            })
            .collect();
        Self { angles, values }
    }

    /// First grid angle holding the maximum.
    pub fn peak_angle(&self) -> f64 {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        self.angles[best]
    }

    /// Value at the grid point nearest `theta`.
    pub fn value_at(&self, theta: f64) -> f64 {
        let i = (0..self.angles.len())
            .min_by(|&i, &j| (self.angles[i] - theta).abs().total_cmp(&(self.angles[j] - theta).abs()))
            .expect("non-empty grid");
        self.values[i]
    }

    /// Largest value over `[lo, hi]`, or `−∞` if no grid point falls inside.
    pub fn max_over(&self, lo: f64, hi: f64) -> f64 {
        self.angles
            .iter()
            .zip(&self.values)
            .filter(|(a, _)| **a >= lo && **a <= hi)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Peak-to-trough spread in dB.
    pub fn dynamic_range(&self) -> f64 {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

/// Raw transmit pattern `‖Wᴴ a(θ)‖²` in watts.
pub fn beampattern_power(bf: &Beamformer, grid: &[f64], spacing: f64) -> Vec<f64> {
    let n = bf.w.nrows();
    let wh = bf.w.adjoint();
    grid.iter().map(|&t| linalg::norm_sqr(&(&wh * steering_vector(t, n, spacing)))).collect()
}

pub fn beampattern(bf: &Beamformer, grid: &[f64], spacing: f64) -> SpectrumResult {
    SpectrumResult::from_power(grid.to_vec(), &beampattern_power(bf, grid, spacing))
}

/// Capon spectrum `1 / (bᴴ R̂⁻¹ b)` with `R̂ = Y Yᴴ / L` plus diagonal loading
/// `loading · tr(R̂) / N_R`.
pub fn capon_spectrum(y: &CMatrix, grid: &[f64], loading: f64, spacing: f64) -> Result<SpectrumResult> {
    let (n_rx, l) = y.shape();
    if l == 0 || n_rx == 0 {
        return Err(Error::InvalidInput("echo needs at least one snapshot".into()));
    }
    let mut r = y * y.adjoint() * cr(1.0 / l as f64);
    let load = loading * linalg::trace(&r).re / n_rx as f64;
    for i in 0..n_rx {
        r[(i, i)] += cr(load);
    }
    let chol = linalg::cholesky(&linalg::hermitian_part(&r))
        .map_err(|e| Error::Numerical(format!("sample covariance is singular after loading: {e}")))?;
    let mut power = Vec::with_capacity(grid.len());
    for &t in grid {
        let b = steering_vector(t, n_rx, spacing);
        let z = chol.solve_lower_triangular(&b).ok_or_else(|| Error::Numerical("zero pivot in Capon solve".into()))?;
        power.push(1.0 / linalg::norm_sqr(&z));
    }
    Ok(SpectrumResult::from_power(grid.to_vec(), &power))
}

/// Grid maximum-likelihood estimator for a single point target with unknown
/// complex gain. Steering vectors for the grid are built once.
pub struct MleEstimator {
    grid: Vec<f64>,
    /// `a(θ_g)` as columns, `N_T × G`.
    a: CMatrix,
    /// `b(θ_g)` as columns, `N_R × G`.
    b: CMatrix,
}

impl MleEstimator {
    pub fn new(grid: Vec<f64>, n_tx: usize, n_rx: usize, spacing: f64) -> Self {
        let cols = |n: usize| {
            let mut m = CMatrix::zeros(n, grid.len());
            for (g, &t) in grid.iter().enumerate() {
                m.set_column(g, &steering_vector(t, n, spacing).column(0));
            }
            m
        };
        let (a, b) = (cols(n_tx), cols(n_rx));
        Self { grid, a, b }
    }

    pub fn for_instance(inst: &Instance, step: f64) -> Self {
        let cfg = &inst.config;
        Self::new(full_grid(step), cfg.n_tx, cfg.n_rx, cfg.spacing)
    }

    /// `argmax_θ |b(θ)ᴴ Y Sᴴ Wᴴ a(θ)|² / (‖b(θ)‖² ‖Sᴴ Wᴴ a(θ)‖²)`.
    pub fn estimate(&self, echo: &Echo, bf: &Beamformer) -> f64 {
        let v = bf.w.adjoint() * &self.a;
        let u = (&echo.y * echo.s.adjoint()) * &v;
        let ss = &echo.s * echo.s.adjoint();
        let tv = &ss * &v;
        let mut best = (f64::NEG_INFINITY, self.grid[0]);
        for g in 0..self.grid.len() {
            let num: num_complex::Complex64 = (0..self.b.nrows()).map(|r| self.b[(r, g)].conj() * u[(r, g)]).sum();
            let den: f64 = (0..v.nrows()).map(|k| (v[(k, g)].conj() * tv[(k, g)]).re).sum::<f64>()
                * self.b.column(g).norm_squared();
            if den > 0.0 {
                let score = num.norm_sqr() / den;
                if score > best.0 {
                    best = (score, self.grid[g]);
                }
            }
        }
        best.1
    }
}

pub fn mle_angle(echo: &Echo, bf: &Beamformer, inst: &Instance, grid: &[f64]) -> f64 {
    let cfg = &inst.config;
    MleEstimator::new(grid.to_vec(), cfg.n_tx, cfg.n_rx, cfg.spacing).estimate(echo, bf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Closed form, one user, no interference.
    Closed,
    /// Relaxation plus randomization, one user, point interference.
    Sdr,
    /// Algorithm 1.
    MmSingle,
    /// Algorithm 2.
    MmMulti,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Closed => "closed",
            Scheme::Sdr => "sdr",
            Scheme::MmSingle => "mm-single",
            Scheme::MmMulti => "mm-multi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Scheme::Closed),
            "sdr" => Ok(Scheme::Sdr),
            "mm-single" => Ok(Scheme::MmSingle),
            "mm-multi" => Ok(Scheme::MmMulti),
            _ => Err(Error::InvalidInput(format!("unknown solver '{s}'"))),
        }
    }

    /// Scenario restrictions of each solver.
    pub fn check(self, cfg: &SystemConfig, interference: Option<ScattererKind>) -> Result<()> {
        let one_user = |what: &str| {
            if cfg.n_users != 1 {
                Err(Error::InvalidInput(format!("solver {what} requires n_users = 1, got {}", cfg.n_users)))
            } else {
                Ok(())
            }
        };
        match self {
            Scheme::Closed => {
                one_user("closed")?;
                if interference.is_some() {
                    return Err(Error::InvalidInput("solver closed requires interference = none".into()));
                }
            }
            Scheme::Sdr => {
                one_user("sdr")?;
                if interference != Some(ScattererKind::Point) {
                    return Err(Error::InvalidInput("solver sdr requires a point interferer".into()));
                }
            }
            Scheme::MmSingle => one_user("mm-single")?,
            Scheme::MmMulti => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Algorithm 1 stopping and bisection tolerance.
    pub eps1: f64,
    /// Algorithm 2 stopping tolerance.
    pub eps2: f64,
    pub max_iter: usize,
    pub randomizations: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps1: solver_mm::EPS1,
            eps2: solver_mm::EPS2,
            max_iter: solver_mm::MAX_ITER,
            randomizations: solver_sdr::DEFAULT_RANDOMIZATIONS,
            seed: 0,
        }
    }
}

/// Solver-independent summary of one solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub beamformer: Beamformer,
    /// Nats.
    pub mi: f64,
    /// Bits/s/Hz per user.
    pub rates: Vec<f64>,
    pub iterations: usize,
    pub status: String,
    pub kkt_residual: Option<f64>,
    /// Nats per iteration, initial point first; a single entry for direct solvers.
    pub mi_trace: Vec<f64>,
}

pub fn solve(inst: &Instance, scheme: Scheme, opts: &SolverOptions) -> Result<Solution> {
    scheme.check(&inst.config, inst.interference.as_ref().map(|m| m.kind))?;
    let finish = |bf: Beamformer, iterations, status: String, kkt, trace: Option<Vec<f64>>| {
        let mi = model::mutual_information(inst, &bf);
        Solution {
            rates: model::achievable_rates(inst, &bf),
            beamformer: bf,
            mi,
            iterations,
            status,
            kkt_residual: kkt,
            mi_trace: trace.unwrap_or_else(|| vec![mi]),
        }
    };
    let mm = |eps| MmOptions { eps, max_iter: opts.max_iter, tau_tol: opts.eps1, ..MmOptions::single_user() };
    let status = |s: MmStatus| match s {
        MmStatus::Converged => "converged",
        MmStatus::Stalled => "stalled",
        MmStatus::MaxIter => "max-iter",
    };
    Ok(match scheme {
        Scheme::Closed => {
            let bf = solve_closed_form(&ClosedFormInputs::from_instance(inst)?)?;
            finish(bf, 0, "closed-form".into(), None, None)
        }
        Scheme::Sdr => {
            let sdr = SdrOptions { n_randomizations: opts.randomizations, seed: opts.seed, ..SdrOptions::default() };
            let r = solver_sdr::solve(inst, &sdr)?;
            let s = if r.used_fallback { "eigenvector-fallback" } else { "randomized" };
            finish(r.beamformer, r.sdp_iterations, s.into(), None, None)
        }
        Scheme::MmSingle => {
            let r = solver_mm::algorithm1(inst, &mm(opts.eps1))?;
            finish(r.beamformer, r.iterations, status(r.status).into(), Some(r.kkt_residual), Some(r.mi_trace))
        }
        Scheme::MmMulti => {
            let r = solver_mm::algorithm2(inst, &mm(opts.eps2))?;
            finish(r.beamformer, r.iterations, status(r.status).into(), Some(r.kkt_residual), Some(r.mi_trace))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PowerDbm,
    RateTarget,
    RadarSnrDb,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PowerDbm => "power_dbm",
            SweepVariable::RateTarget => "rate_target",
            SweepVariable::RadarSnrDb => "radar_snr_db",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub scheme: Scheme,
    pub trials: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidInput("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sweep grid has a non-finite value".into()));
        }
        if self.grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidInput("sweep grid must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Radar SNR `β² L P0 / σ_Z²` in dB.
pub fn radar_snr_db(inst: &Instance) -> f64 {
    let cfg = &inst.config;
    10.0 * (inst.target.total_strength() * cfg.n_slots as f64 * cfg.p0 / cfg.sigma_z2).log10()
}

/// Copy of `inst` with the swept quantity set to `value`. Radar SNR is moved by
/// rescaling the target strength.
pub fn apply_variable(inst: &Instance, variable: SweepVariable, value: f64) -> Result<Instance> {
    let mut cfg = inst.config.clone();
    match variable {
        SweepVariable::PowerDbm => cfg.p0 = dbm_to_watts(value),
        SweepVariable::RateTarget => cfg.rate_targets = vec![value; cfg.n_users],
        SweepVariable::RadarSnrDb => {
            let total = inst.target.total_strength();
            if !(total > 0.0) {
                return Err(Error::InvalidInput("radar SNR sweep needs a target with positive strength".into()));
            }
            let want = 10f64.powf(value / 10.0) * cfg.sigma_z2 / (cfg.n_slots as f64 * cfg.p0);
            let target = inst.target.scaled(want / total);
            return Instance::new(cfg, inst.channel.clone(), target, inst.interference.clone());
        }
    }
    inst.with_config(cfg)
}

/// Deterministic seed for item `index` of substream `stream`; independent of
/// how many items are drawn or in which order.
pub fn derived_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub seed: u64,
    pub outcome: Result<Solution>,
}

/// Solves every grid point in parallel; results come back in grid order.
pub fn mi_sweep(spec: &SweepSpec, inst: &Instance, opts: &SolverOptions) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    Ok(spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let seed = derived_seed(spec.seed, 0, i as u64);
            let outcome = apply_variable(inst, spec.variable, value)
                .and_then(|p| solve(&p, spec.scheme, &SolverOptions { seed, ..opts.clone() }));
            SweepPoint { value, seed, outcome }
        })
        .collect())
}

/// Angle estimates for trials `0..trials` of grid point `point`.
pub fn angle_estimates(
    inst: &Instance,
    bf: &Beamformer,
    est: &MleEstimator,
    seed: u64,
    point: usize,
    trials: usize,
) -> Vec<f64> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let echo = model::simulate_echo_full(inst, bf, derived_seed(seed, 1 + point as u64, t as u64));
            est.estimate(&echo, bf)
        })
        .collect()
}

/// `sqrt(mean((θ̂ − θ)²))`.
pub fn rmse(estimates: &[f64], truth: f64) -> f64 {
    (estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / estimates.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseRow {
    pub value: f64,
    pub rmse_deg: f64,
    pub trials: usize,
    pub seed: u64,
    pub iterations: usize,
}

pub const MIN_RMSE_TRIALS: usize = 50;

/// Per grid point: design the beamformer with `spec.scheme`, then estimate the
/// target angle from `spec.trials` simulated echoes.
pub fn rmse_sweep(spec: &SweepSpec, inst: &Instance, opts: &SolverOptions, step: f64) -> Result<Vec<RmseRow>> {
    spec.validate()?;
    if spec.trials < MIN_RMSE_TRIALS {
        return Err(Error::InvalidInput(format!("rmse needs at least {MIN_RMSE_TRIALS} trials")));
    }
    if inst.target.kind != ScattererKind::Point {
        return Err(Error::InvalidInput("angle estimation needs a point target".into()));
    }
    let truth = inst.target.angles_deg[0];
    let est = MleEstimator::for_instance(inst, step);
    spec.grid
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let p = apply_variable(inst, spec.variable, value)?;
            let seed = derived_seed(spec.seed, 0, i as u64);
            let sol = solve(&p, spec.scheme, &SolverOptions { seed, ..opts.clone() })?;
            let e = angle_estimates(&p, &sol.beamformer, &est, spec.seed, i, spec.trials);
            Ok(RmseRow {
                value,
                rmse_deg: rmse(&e, truth),
                trials: spec.trials,
                seed: spec.seed,
                iterations: sol.iterations,
            })
        })
        .collect()
}
