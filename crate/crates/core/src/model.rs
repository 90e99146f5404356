//! Physical problem: array geometry, scatterer covariances, channels, and the
//! two performance metrics (radar mutual information, per-user rate).

use std::f64::consts::{LN_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMatrix, ONE};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
    /// Snapshot count `L`.
    pub n_slots: usize,
    /// Total transmit power budget, watts.
    pub p0: f64,
    /// Communication noise power, watts.
    pub sigma_n2: f64,
    /// Radar receiver noise power, watts.
    pub sigma_z2: f64,
    /// Per-user rate targets, bits/s/Hz.
    pub rate_targets: Vec<f64>,
    pub rng_seed: u64,
    /// Element spacing in wavelengths (both arrays).
    pub spacing: f64,
}

impl SystemConfig {
    /// `N_T = N_R = 6`, `L = 30`, `P0 = 40 dBm`, `σ_N² = 20 dBm`, `σ_Z² = 30 dBm`,
    /// 6 bits/s/Hz per user, half-wavelength arrays.
    pub fn baseline(n_users: usize) -> Self {
        Self {
            n_tx: 6,
            n_rx: 6,
            n_users,
            n_slots: 30,
            p0: dbm_to_watts(40.0),
            sigma_n2: dbm_to_watts(20.0),
            sigma_z2: dbm_to_watts(30.0),
            rate_targets: vec![6.0; n_users],
            rng_seed: 0,
            spacing: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [("n_tx", self.n_tx), ("n_rx", self.n_rx), ("n_users", self.n_users), ("n_slots", self.n_slots)];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be >= 1")));
            }
        }
        for (name, v) in [("p0", self.p0), ("sigma_n2", self.sigma_n2), ("sigma_z2", self.sigma_z2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be a positive power, got {v}")));
            }
        }
        if self.rate_targets.len() != self.n_users {
            return Err(Error::InvalidInput(format!(
                "rate_targets has {} entries for {} users",
                self.rate_targets.len(),
                self.n_users
            )));
        }
        if self.rate_targets.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidInput("rate_targets must be >= 0".into()));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::InvalidInput("spacing must be > 0".into()));
        }
        Ok(())
    }

    /// `δ = L / σ_Z²`.
    pub fn delta(&self) -> f64 {
        self.n_slots as f64 / self.sigma_z2
    }

    /// Received-power threshold `(2^r − 1) σ_N²` implied by a rate target.
    pub fn omega(&self, user: usize) -> f64 {
        (2f64.powf(self.rate_targets[user]) - 1.0) * self.sigma_n2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScattererKind {
    Point,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererModel {
    pub kind: ScattererKind,
    pub angles_deg: Vec<f64>,
    /// Average strengths (`β²` or `γ_i²`).
    pub strengths: Vec<f64>,
}

impl ScattererModel {
    pub fn point(angle_deg: f64, strength: f64) -> Self {
        Self { kind: ScattererKind::Point, angles_deg: vec![angle_deg], strengths: vec![strength] }
    }

    /// `count` scatterers on a uniform grid over `[lo, hi]` (endpoints included).
    pub fn extended_uniform(lo: f64, hi: f64, count: usize, strength: f64) -> Self {
        let angles_deg = if count == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
        };
        Self { kind: ScattererKind::Extended, angles_deg, strengths: vec![strength; count] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles_deg.is_empty() || self.angles_deg.len() != self.strengths.len() {
            return Err(Error::InvalidInput("scatterer angles/strengths length mismatch".into()));
        }
        if self.kind == ScattererKind::Point && self.angles_deg.len() != 1 {
            return Err(Error::InvalidInput("a point scatterer has exactly one angle".into()));
        }
        if self.strengths.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidInput("scatterer strengths must be >= 0".into()));
        }
        if self.angles_deg.iter().any(|a| !(*a > -90.0 && *a < 90.0)) {
            return Err(Error::InvalidInput("scatterer angles must lie in (-90, 90) degrees".into()));
        }
        Ok(())
    }

    pub fn total_strength(&self) -> f64 {
        self.strengths.iter().sum()
    }

    /// Same geometry with every strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { strengths: self.strengths.iter().map(|s| s * factor).collect(), ..self.clone() }
    }
}

/// ULA steering vector: entry `m` is `exp(−i·2π·spacing·m·sin θ)`.
pub fn steering_vector(theta_deg: f64, n: usize, spacing: f64) -> CMatrix {
    let phase = -2.0 * PI * spacing * theta_deg.to_radians().sin();
    CMatrix::from_fn(n, 1, |m, _| {
        let p = phase * m as f64;
        c(p.cos(), p.sin())
    })
}

/// `b*(θ) ⊗ a(θ) = vec(a bᴴ)`, the direction vector of `vec(Gᴴ)` for a unit scatterer.
fn response_vector(theta_deg: f64, cfg: &SystemConfig) -> CMatrix {
    let a = steering_vector(theta_deg, cfg.n_tx, cfg.spacing);
    let b = steering_vector(theta_deg, cfg.n_rx, cfg.spacing);
    linalg::kron(&b.map(|z| z.conj()), &a)
}

/// Covariance of `vec(Gᴴ)`: `Σ_i s_i (b*⊗a)(b*⊗a)ᴴ`.
pub fn covariance(model: &ScattererModel, cfg: &SystemConfig) -> CMatrix {
    let dim = cfg.n_tx * cfg.n_rx;
    let mut r = CMatrix::zeros(dim, dim);
    for (&theta, &s) in model.angles_deg.iter().zip(&model.strengths) {
        if s == 0.0 {
            continue;
        }
        let v = response_vector(theta, cfg);
        r += (&v * v.adjoint()) * cr(s);
    }
    linalg::hermitian_part(&r)
}

/// `K × N_T` i.i.d. `CN(0, 1)` channel.
pub fn rayleigh_channel(n_users: usize, n_tx: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    complex_gaussian(&mut rng, n_users, n_tx, 1.0)
}

/// Matrix of i.i.d. circularly-symmetric complex Gaussians with the given variance.
pub fn complex_gaussian<R: rand::Rng>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMatrix {
    let s = (variance / 2.0).sqrt();
    let mut m = CMatrix::zeros(rows, cols);
    // Column-major fill keeps the draw order tied to vec().
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = c(s * re, s * im);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    /// `N_T × K`.
    pub w: CMatrix,
}

impl Beamformer {
    pub fn new(w: CMatrix) -> Self {
        Self { w }
    }

    pub fn power(&self) -> f64 {
        linalg::norm_sqr(&self.w)
    }

    pub fn column(&self, k: usize) -> CMatrix {
        self.w.columns(k, 1).into_owned()
    }

    /// `w̃ = vec(W)`.
    pub fn stacked(&self) -> CMatrix {
        linalg::vec(&self.w)
    }

    pub fn from_stacked(v: &CMatrix, n_tx: usize, n_users: usize) -> Self {
        Self { w: linalg::unvec(v, n_tx, n_users) }
    }
}

/// One solvable problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub config: SystemConfig,
    /// `H`, `K × N_T`, row `k` is `h_kᴴ`.
    pub channel: CMatrix,
    pub target: ScattererModel,
    pub interference: Option<ScattererModel>,
    /// `R_R`.
    pub r_target: CMatrix,
    /// `R_C` (zero when there is no interference).
    pub r_interf: CMatrix,
}

impl Instance {
    pub fn new(
        config: SystemConfig,
        channel: CMatrix,
        target: ScattererModel,
        interference: Option<ScattererModel>,
    ) -> Result<Self> {
        config.validate()?;
        target.validate()?;
        if let Some(i) = &interference {
            i.validate()?;
        }
        if channel.shape() != (config.n_users, config.n_tx) {
            return Err(Error::InvalidInput(format!(
                "channel is {}x{}, expected {}x{}",
                channel.nrows(),
                channel.ncols(),
                config.n_users,
                config.n_tx
            )));
        }
        let r_target = covariance(&target, &config);
        let dim = config.n_tx * config.n_rx;
        let r_interf = match &interference {
            Some(m) => covariance(m, &config),
            None => CMatrix::zeros(dim, dim),
        };
        Ok(Self { config, channel, target, interference, r_target, r_interf })
    }

    /// Same scene, rebuilt for a modified configuration (channel is kept).
    pub fn with_config(&self, config: SystemConfig) -> Result<Self> {
        Self::new(config, self.channel.clone(), self.target.clone(), self.interference.clone())
    }

    pub fn without_interference(&self) -> Result<Self> {
        Self::new(self.config.clone(), self.channel.clone(), self.target.clone(), None)
    }

    /// `h_k` as a column.
    pub fn user_channel(&self, k: usize) -> CMatrix {
        self.channel.rows(k, 1).adjoint()
    }

    pub fn r_sum(&self) -> CMatrix {
        &self.r_target + &self.r_interf
    }

    pub fn has_interference(&self) -> bool {
        self.interference.as_ref().is_some_and(|m| m.total_strength() > 0.0)
    }
}

/// Explicit `W̃ = I_{N_R} ⊗ Wᴴ`.
pub fn w_tilde(w: &CMatrix, n_rx: usize) -> CMatrix {
    linalg::kron(&linalg::eye(n_rx), &w.adjoint())
}

/// `W̃ R W̃ᴴ` computed blockwise: block `(p, q)` is `Wᴴ R_{pq} W`.
pub fn w_tilde_sandwich(w: &CMatrix, r: &CMatrix, n_rx: usize) -> CMatrix {
    let (n_tx, k) = w.shape();
    let wh = w.adjoint();
    let mut out = CMatrix::zeros(n_rx * k, n_rx * k);
    for p in 0..n_rx {
        for q in 0..n_rx {
            let blk = r.view((p * n_tx, q * n_tx), (n_tx, n_tx));
            let v = &wh * blk * w;
            out.view_mut((p * k, q * k), (k, k)).copy_from(&v);
        }
    }
    out
}

/// Radar MI in nats:
/// `logdet(I + δ W̃ (R_R+R_C) W̃ᴴ) − logdet(I + δ W̃ R_C W̃ᴴ)`, `δ = L/σ_Z²`.
pub fn mutual_information(inst: &Instance, bf: &Beamformer) -> f64 {
    mi_from_parts(&inst.config, &inst.r_target, &inst.r_interf, &bf.w)
}

pub(crate) fn mi_from_parts(cfg: &SystemConfig, r_target: &CMatrix, r_interf: &CMatrix, w: &CMatrix) -> f64 {
    let delta = cfg.delta();
    let dim = cfg.n_rx * w.ncols();
    let r_sum = r_target + r_interf;
    let t = linalg::eye(dim) + w_tilde_sandwich(w, &r_sum, cfg.n_rx) * cr(delta);
    let first = linalg::logdet_hermitian(&linalg::hermitian_part(&t)).expect("I + PSD is positive definite");
    let second = if r_interf.iter().all(|z| *z == linalg::ZERO) {
        0.0
    } else {
        let u = linalg::eye(dim) + w_tilde_sandwich(w, r_interf, cfg.n_rx) * cr(delta);
        linalg::logdet_hermitian(&linalg::hermitian_part(&u)).expect("I + PSD is positive definite")
    };
    (first - second).max(0.0)
}

/// `|h_kᴴ w_j|²` for all `(k, j)`.
fn gains(inst: &Instance, bf: &Beamformer) -> CMatrix {
    &inst.channel * &bf.w
}

/// Rate of user `k` (0-based) in bits/s/Hz.
pub fn achievable_rate(inst: &Instance, bf: &Beamformer, k: usize) -> f64 {
    let g = gains(inst, bf);
    let signal = g[(k, k)].norm_sqr();
    let interference: f64 = (0..g.ncols()).filter(|&j| j != k).map(|j| g[(k, j)].norm_sqr()).sum();
    (1.0 + signal / (interference + inst.config.sigma_n2)).log2()
}

pub fn achievable_rates(inst: &Instance, bf: &Beamformer) -> Vec<f64> {
    (0..inst.config.n_users).map(|k| achievable_rate(inst, bf, k)).collect()
}

/// Positions of the ones in `F`: `vec(I_{N_R} ⊗ Wᴴ)[row] = conj(vec(W)[col])`.
///
/// Each column of `F` holds `N_R` ones; rows not listed are zero.
pub fn f_pattern(n_tx: usize, n_rx: usize, n_users: usize) -> Vec<(usize, usize)> {
    let rows = n_rx * n_users;
    let mut out = Vec::with_capacity(n_rx * n_tx * n_users);
    for rb in 0..n_rx {
        for k in 0..n_users {
            for n in 0..n_tx {
                let row = (rb * n_users + k) + (rb * n_tx + n) * rows;
                out.push((row, n + k * n_tx));
            }
        }
    }
    out
}

/// `F = [C_1 ⊗ I_K, …, C_{N_T N_R} ⊗ I_K]ᵀ K_{N_T K}`, with `C_i` the `N_T × N_R`
/// elementary matrix holding a one at `(mod(i−1, N_T), ⌊(i−1)/N_T⌋)` (0-based).
///
/// Shape: `(N_T N_R · N_R K) × N_T K`.
pub fn build_f(cfg: &SystemConfig) -> CMatrix {
    build_f_dims(cfg.n_tx, cfg.n_rx, cfg.n_users)
}

pub fn build_f_dims(n_tx: usize, n_rx: usize, n_users: usize) -> CMatrix {
    let ik = linalg::eye(n_users);
    let blocks = n_tx * n_rx;
    let blk_rows = n_rx * n_users;
    let mut stacked = CMatrix::zeros(blocks * blk_rows, n_tx * n_users);
    for i in 0..blocks {
        let mut ci = CMatrix::zeros(n_tx, n_rx);
        ci[(i % n_tx, i / n_tx)] = ONE;
        let blk = linalg::kron(&ci, &ik).transpose();
        stacked.view_mut((i * blk_rows, 0), (blk_rows, n_tx * n_users)).copy_from(&blk);
    }
    let f = stacked * linalg::build_commutation(n_tx, n_users).to_dense();
    debug_assert_eq!(f.shape(), (blocks * blk_rows, n_tx * n_users));
    f
}

/// One simulated radar snapshot block together with the symbols that produced it.
#[derive(Debug, Clone)]
pub struct Echo {
    /// `Y_R`, `N_R × L`.
    pub y: CMatrix,
    /// `S`, `K × L`.
    pub s: CMatrix,
}

/// Simulated echo `Y_R = (G_R + G_C) W S + Z`, `N_R × L`.
///
/// Reflection coefficients are `CN(0, strength)`; `S` has unit-variance
/// entries; `Z` has variance `σ_Z²`.
pub fn simulate_echo(inst: &Instance, bf: &Beamformer, seed: u64) -> CMatrix {
    simulate_echo_full(inst, bf, seed).y
}

/// Same draws as [`simulate_echo`], also returning `S`.
pub fn simulate_echo_full(inst: &Instance, bf: &Beamformer, seed: u64) -> Echo {
    let cfg = &inst.config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMatrix::zeros(cfg.n_rx, cfg.n_tx);
    let mut add = |model: &ScattererModel, rng: &mut ChaCha8Rng| {
        for (&theta, &s) in model.angles_deg.iter().zip(&model.strengths) {
            let alpha = complex_gaussian(rng, 1, 1, s)[(0, 0)];
            let a = steering_vector(theta, cfg.n_tx, cfg.spacing);
            let b = steering_vector(theta, cfg.n_rx, cfg.spacing);
            g += (b * a.adjoint()) * alpha;
        }
    };
    add(&inst.target, &mut rng);
    if let Some(m) = &inst.interference {
        add(m, &mut rng);
    }
    let s = complex_gaussian(&mut rng, bf.w.ncols(), cfg.n_slots, 1.0);
    let z = complex_gaussian(&mut rng, cfg.n_rx, cfg.n_slots, cfg.sigma_z2);
    Echo { y: g * &bf.w * &s + z, s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, norm_sqr};

    fn small_cfg(n_tx: usize, n_rx: usize, k: usize) -> SystemConfig {
        SystemConfig { n_tx, n_rx, n_users: k, rate_targets: vec![1.0; k], ..SystemConfig::baseline(k) }
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(40.0) - 10.0).abs() < 1e-12);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((watts_to_dbm(10.0) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn steering_cases() {
        let a = steering_vector(0.0, 4, 0.5);
        assert!(a.iter().all(|z| (*z - ONE).norm() < 1e-15));
        let a = steering_vector(30.0, 2, 0.5);
        assert!((a[0] - ONE).norm() < 1e-15);
        assert!((a[1] - c(0.0, -1.0)).norm() < 1e-12);
        for theta in [-71.3, -5.0, 12.5, 88.0] {
            assert!((norm_sqr(&steering_vector(theta, 7, 0.5)) - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_covariance() {
        let cfg = small_cfg(2, 2, 1);
        let r = covariance(&ScattererModel::point(0.0, 1.0), &cfg);
        assert!(r.iter().all(|z| (*z - ONE).norm() < 1e-14));
        let cfg = small_cfg(4, 3, 1);
        let r = covariance(&ScattererModel::point(17.0, 2.5), &cfg);
        assert_eq!(linalg::hermitian_rank(&r, 1e-8), 1);
        assert!((linalg::trace(&r).re - 2.5 * 12.0).abs() < 1e-10 * 30.0);
    }

    #[test]
    fn extended_covariance_rank() {
        let cfg = small_cfg(4, 3, 1);
        let m =
            ScattererModel { kind: ScattererKind::Extended, angles_deg: vec![-20.0, 10.0], strengths: vec![1.0, 3.0] };
        let r = covariance(&m, &cfg);
        assert_eq!(linalg::hermitian_rank(&r, 1e-8), 2);
        assert!(linalg::is_hermitian(&r, 1e-12));
        assert!((linalg::trace(&r).re - 4.0 * 12.0).abs() < 1e-10 * 48.0);
    }

    #[test]
    fn extended_uniform_grid() {
        let m = ScattererModel::extended_uniform(-30.0, -25.0, 50, 100.0);
        assert_eq!(m.angles_deg.len(), 50);
        assert_eq!(m.angles_deg[0], -30.0);
        assert!((m.angles_deg[49] + 25.0).abs() < 1e-12);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn validation_errors() {
        let mut cfg = SystemConfig::baseline(2);
        cfg.rate_targets = vec![1.0];
        assert!(cfg.validate().is_err());
        let bad = ScattererModel::point(95.0, 1.0);
        assert!(bad.validate().is_err());
        let neg = ScattererModel::point(0.0, -1.0);
        assert!(neg.validate().is_err());
    }

    #[test]
    fn sandwich_matches_explicit() {
        let cfg = small_cfg(3, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = complex_gaussian(&mut rng, 3, 2, 1.0);
        let x = complex_gaussian(&mut rng, 6, 6, 1.0);
        let r = &x * x.adjoint();
        let wt = w_tilde(&w, cfg.n_rx);
        let explicit = &wt * &r * wt.adjoint();
        assert!(max_abs(&(explicit - w_tilde_sandwich(&w, &r, cfg.n_rx))) < 1e-12);
    }

    #[test]
    fn f_identity_and_shape() {
        assert_eq!(build_f_dims(1, 1, 1), linalg::eye(1));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (nt, nr, k) in [(3, 2, 2), (2, 3, 1), (4, 2, 3)] {
            let f = build_f_dims(nt, nr, k);
            assert_eq!(f.shape(), (nt * nr * nr * k, nt * k));
            for row in 0..f.nrows() {
                let ones = f.row(row).iter().filter(|z| **z != linalg::ZERO).count();
                assert!(ones <= 1);
            }
            let w = complex_gaussian(&mut rng, nt, k, 1.0);
            let lhs = linalg::vec(&w_tilde(&w, nr));
            let rhs = &f * linalg::vec(&w).map(|z| z.conj());
            assert_eq!(lhs, rhs);
            let mut dense = CMatrix::zeros(f.nrows(), f.ncols());
            for (r_, c_) in f_pattern(nt, nr, k) {
                dense[(r_, c_)] = ONE;
            }
            assert_eq!(dense, f);
        }
    }

    fn baseline_instance(interf: Option<ScattererModel>, seed: u64) -> Instance {
        let cfg = SystemConfig::baseline(1);
        Instance::new(cfg, rayleigh_channel(1, 6, seed), ScattererModel::point(0.0, 1.0), interf).unwrap()
    }

    #[test]
    fn mi_zero_when_orthogonal() {
        let inst = baseline_instance(None, 1);
        // a(0) is all ones; an alternating-sign vector is orthogonal to it.
        let w = CMatrix::from_fn(6, 1, |i, _| cr(if i % 2 == 0 { 1.0 } else { -1.0 }));
        assert!(mutual_information(&inst, &Beamformer::new(w)).abs() < 1e-12);
    }

    #[test]
    fn mi_point_target_closed_form() {
        let inst = baseline_instance(None, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = complex_gaussian(&mut rng, 6, 1, 1.0);
        let a = steering_vector(0.0, 6, 0.5);
        let cfg = &inst.config;
        let gain = linalg::inner(&a, &w).norm_sqr();
        let expect = (1.0 + cfg.delta() * 1.0 * cfg.n_rx as f64 * gain).ln();
        // Direct K·N_R × K·N_R logdet through the explicit W̃.
        let wt = w_tilde(&w, cfg.n_rx);
        let m = linalg::eye(cfg.n_rx) * cr(cfg.sigma_z2) + &wt * &inst.r_target * wt.adjoint() * cr(cfg.n_slots as f64);
        let direct =
            linalg::logdet_hermitian(&linalg::hermitian_part(&m)).unwrap() - cfg.n_rx as f64 * cfg.sigma_z2.ln();
        let got = mutual_information(&inst, &Beamformer::new(w));
        assert!((got - expect).abs() < 1e-10 * expect);
        assert!((got - direct).abs() < 1e-10 * expect);
    }

    #[test]
    fn mi_decreases_with_radar_noise() {
        let inst = baseline_instance(Some(ScattererModel::point(-30.0, 100.0)), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let bf = Beamformer::new(complex_gaussian(&mut rng, 6, 1, 1.0));
        let mut cfg = inst.config.clone();
        cfg.sigma_z2 *= 2.0;
        let noisier = inst.with_config(cfg).unwrap();
        assert!(mutual_information(&noisier, &bf) < mutual_information(&inst, &bf));
    }

    #[test]
    fn mi_phase_invariant() {
        let inst = baseline_instance(Some(ScattererModel::extended_uniform(-30.0, -25.0, 5, 10.0)), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = complex_gaussian(&mut rng, 6, 1, 1.0);
        let rotated = &w * c(0.3f64.cos(), 0.3f64.sin());
        let a = mutual_information(&inst, &Beamformer::new(w));
        let b = mutual_information(&inst, &Beamformer::new(rotated));
        assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }

    #[test]
    fn rate_cases() {
        let inst = baseline_instance(None, 5);
        let h = inst.user_channel(0);
        let p0 = inst.config.p0;
        let w = &h * cr(p0.sqrt() / norm_sqr(&h).sqrt());
        let r = achievable_rate(&inst, &Beamformer::new(w), 0);
        let expect = (1.0 + p0 * norm_sqr(&h) / inst.config.sigma_n2).log2();
        assert!((r - expect).abs() < 1e-12);
        // w ⊥ h.
        let mut w = CMatrix::zeros(6, 1);
        w[(0, 0)] = h[(1, 0)].conj();
        w[(1, 0)] = -h[(0, 0)].conj();
        assert!(achievable_rate(&inst, &Beamformer::new(w), 0).abs() < 1e-12);
    }

    #[test]
    fn rate_matches_scalar_sinr() {
        let cfg = SystemConfig::baseline(2);
        let inst = Instance::new(cfg, rayleigh_channel(2, 6, 7), ScattererModel::point(0.0, 1.0), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let w = complex_gaussian(&mut rng, 6, 2, 1.0);
        let bf = Beamformer::new(w.clone());
        for k in 0..2 {
            let hk: Vec<_> = (0..6).map(|n| inst.channel[(k, n)]).collect();
            let dot = |j: usize| -> f64 {
                let mut s = linalg::ZERO;
                for n in 0..6 {
                    s += hk[n] * w[(n, j)];
                }
                s.norm_sqr()
            };
            let other = 1 - k;
            let want = (1.0 + dot(k) / (dot(other) + inst.config.sigma_n2)).log2();
            assert!((achievable_rate(&inst, &bf, k) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn echo_noise_only_and_determinism() {
        let cfg = SystemConfig { n_slots: 2000, ..SystemConfig::baseline(1) };
        let inst = Instance::new(
            cfg.clone(),
            rayleigh_channel(1, 6, 1),
            ScattererModel::point(0.0, 0.0),
            Some(ScattererModel::point(-30.0, 0.0)),
        )
        .unwrap();
        let bf = Beamformer::new(steering_vector(0.0, 6, 0.5));
        let y = simulate_echo(&inst, &bf, 42);
        let var = norm_sqr(&y) / y.len() as f64;
        assert!((var - cfg.sigma_z2).abs() < 0.05 * cfg.sigma_z2);
        assert_eq!(y, simulate_echo(&inst, &bf, 42));

        let inst = Instance::new(cfg, rayleigh_channel(1, 6, 1), ScattererModel::point(0.0, 1.0), None).unwrap();
        let zero = Beamformer::new(CMatrix::zeros(6, 1));
        let y = simulate_echo(&inst, &zero, 5);
        // Reproduce Z alone from the same stream.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let _alpha = complex_gaussian(&mut rng, 1, 1, 1.0);
        let _s = complex_gaussian(&mut rng, 1, inst.config.n_slots, 1.0);
        let z = complex_gaussian(&mut rng, 6, inst.config.n_slots, inst.config.sigma_z2);
        assert_eq!(y, z);
    }
}
