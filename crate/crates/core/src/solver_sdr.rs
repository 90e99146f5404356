//! Single-user beamforming against a point target and a point interferer by
//! semidefinite relaxation followed by Gaussian randomization.
//!
//! With both covariances rank one, `W̃ R W̃ᴴ` has rank at most two and the MI
//! reduces to a 2×2 determinant. A Schur complement turns the ratio of
//! determinants into a linear matrix inequality in `W̄ = wwᴴ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conic::{self, ConicStatus, LmiBlock, LmiTerm, Relation, SdpObjective, SdpProblem, Sense, TraceConstraint};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix};
use crate::model::{complex_gaussian, steering_vector, Beamformer, Instance};

pub const DEFAULT_RANDOMIZATIONS: usize = 1000;

#[derive(Debug, Clone)]
pub struct SdrInputs {
    /// `P = a(θ) bᴴ(θ)`.
    pub p_mat: CMatrix,
    /// `Q = a(θ_c) bᴴ(θ_c)`.
    pub q_mat: CMatrix,
    pub beta2: f64,
    pub gamma2: f64,
    pub n_slots: usize,
    pub sigma_z2: f64,
    pub h: CMatrix,
    pub p0: f64,
    pub omega: f64,
    pub n_randomizations: usize,
}

impl SdrInputs {
    /// Inputs for a single-user instance with a point target and at most one
    /// point interferer.
    pub fn from_instance(inst: &Instance, n_randomizations: usize) -> Result<Self> {
        let cfg = &inst.config;
        if cfg.n_users != 1 {
            return Err(Error::InvalidInput("SDR solver needs exactly one user".into()));
        }
        if inst.target.angles_deg.len() != 1 {
            return Err(Error::InvalidInput("SDR solver needs a point target".into()));
        }
        let outer = |theta: f64| {
            let a = steering_vector(theta, cfg.n_tx, cfg.spacing);
            let b = steering_vector(theta, cfg.n_rx, cfg.spacing);
            a * b.adjoint()
        };
        let (q_mat, gamma2) = match &inst.interference {
            None => (CMatrix::zeros(cfg.n_tx, cfg.n_rx), 0.0),
            Some(m) if m.angles_deg.len() == 1 => (outer(m.angles_deg[0]), m.strengths[0]),
            Some(_) => return Err(Error::InvalidInput("SDR solver needs point interference".into())),
        };
        Ok(Self {
            p_mat: outer(inst.target.angles_deg[0]),
            q_mat,
            beta2: inst.target.strengths[0],
            gamma2,
            n_slots: cfg.n_slots,
            sigma_z2: cfg.sigma_z2,
            h: inst.user_channel(0),
            p0: cfg.p0,
            omega: cfg.omega(0),
            n_randomizations,
        })
    }

    fn n_tx(&self) -> usize {
        self.p_mat.nrows()
    }

    /// Coefficients `(c11, c12, c22)` with `M_ij = coef · Tr(C_ij W̄)` plus noise on the diagonal.
    fn lmi_coefs(&self) -> (CMatrix, CMatrix, CMatrix) {
        let l = self.n_slots as f64;
        let (beta, gamma) = (self.beta2.sqrt(), self.gamma2.sqrt());
        let p = &self.p_mat;
        let q = &self.q_mat;
        let c11 = linalg::hermitian_part(&(p * p.adjoint() * cr(l * self.beta2)));
        let c12 = q * p.adjoint() * cr(l * beta * gamma);
        let c22 = linalg::hermitian_part(&(q * q.adjoint() * cr(l * self.gamma2)));
        (c11, c12, c22)
    }

    /// Exact MI (nats) of a rank-one beamformer through the 2×2 reduction.
    pub fn mutual_information(&self, w: &CMatrix) -> f64 {
        let (c11, c12, c22) = self.lmi_coefs();
        let s = self.sigma_z2;
        let m11 = linalg::quad_form(&c11, w) + s;
        let m12 = linalg::inner(w, &(&c12 * w));
        let m22 = linalg::quad_form(&c22, w) + s;
        ((m11 - m12.norm_sqr() / m22) / s).ln().max(0.0)
    }
}

/// maximize `t` s.t. `[[M11 − t, M12], [M21, M22]] ⪰ 0`, `Tr W̄ ≤ P0`,
/// `Tr(hhᴴ W̄) ≥ Ω`, `W̄ ⪰ 0`.
pub fn build_sdp(inp: &SdrInputs) -> SdpProblem {
    let n = inp.n_tx();
    let (c11, c12, c22) = inp.lmi_coefs();
    let s = cr(inp.sigma_z2);
    let mut t_coef = CMatrix::zeros(2, 2);
    t_coef[(0, 0)] = cr(-1.0);
    let lmi = LmiBlock {
        constant: linalg::eye(2) * s,
        t_coef,
        terms: vec![
            LmiTerm { row: 0, col: 0, coef: c11 },
            LmiTerm { row: 0, col: 1, coef: c12 },
            LmiTerm { row: 1, col: 1, coef: c22 },
        ],
    };
    let hh = linalg::hermitian_part(&(&inp.h * inp.h.adjoint()));
    SdpProblem {
        dim: n,
        objective: SdpObjective { sense: Sense::Maximize, w_coef: CMatrix::zeros(n, n), t_coef: 1.0 },
        lmi_blocks: vec![lmi],
        trace_constraints: vec![
            TraceConstraint { coef: linalg::eye(n), relation: Relation::LessEq, bound: inp.p0 },
            TraceConstraint { coef: hh, relation: Relation::GreaterEq, bound: inp.omega },
        ],
    }
}

/// Relaxed MI upper bound (nats) implied by an SDP value `t`.
pub fn mi_bound(t: f64, sigma_z2: f64) -> f64 {
    (t / sigma_z2).ln()
}

fn rate_feasible(inp: &SdrInputs, w: &CMatrix) -> bool {
    linalg::inner(&inp.h, w).norm_sqr() >= inp.omega * (1.0 - 1e-12)
}

fn full_power(w: &CMatrix, p0: f64) -> Option<CMatrix> {
    let n = linalg::norm_sqr(w);
    (n > 0.0).then(|| w * cr((p0 / n).sqrt()))
}

#[derive(Debug, Clone)]
pub struct Randomized {
    pub beamformer: Beamformer,
    /// Exact MI of the returned beamformer, nats.
    pub mi: f64,
    /// Samples that met the rate constraint after rescaling.
    pub feasible_samples: usize,
    /// The principal eigenvector was used because no sample was feasible.
    pub used_fallback: bool,
}

/// Gaussian randomization: `w = V Λ^{1/2} z` with `z ~ CN(0, I)`, each trial on
/// its own ChaCha stream so the result does not depend on scheduling.
pub fn randomize(w_bar: &CMatrix, inp: &SdrInputs, seed: u64) -> Result<Randomized> {
    if inp.n_randomizations == 0 {
        return Err(Error::InvalidInput("n_randomizations must be >= 1".into()));
    }
    let (vals, vecs) = linalg::hermitian_eigen(w_bar);
    let n = vals.len();
    // Eigenvalues at rounding level would leak noise directions into every sample.
    let floor = linalg::PSD_CLAMP * vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut factor = vecs.clone();
    for j in 0..n {
        let v = if vals[j] > floor { vals[j].sqrt() } else { 0.0 };
        factor.column_mut(j).scale_mut(v);
    }
    let best = (0..inp.n_randomizations)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let z = complex_gaussian(&mut rng, n, 1, 1.0);
            let w = full_power(&(&factor * z), inp.p0)?;
            rate_feasible(inp, &w).then(|| (trial, inp.mutual_information(&w), w))
        })
        .map(|(trial, mi, w)| (1usize, trial, mi, w))
        .reduce_with(|a, b| {
            let count = a.0 + b.0;
            // Highest MI wins; ties go to the earlier trial.
            let keep_a = a.2 > b.2 || (a.2 == b.2 && a.1 < b.1);
            if keep_a {
                (count, a.1, a.2, a.3)
            } else {
                (count, b.1, b.2, b.3)
            }
        });
    if let Some((count, _, mi, w)) = best {
        return Ok(Randomized { beamformer: Beamformer::new(w), mi, feasible_samples: count, used_fallback: false });
    }
    let top = vecs.columns(n - 1, 1).into_owned();
    match full_power(&top, inp.p0) {
        Some(w) if rate_feasible(inp, &w) => {
            let mi = inp.mutual_information(&w);
            Ok(Randomized { beamformer: Beamformer::new(w), mi, feasible_samples: 0, used_fallback: true })
        }
        _ => Err(Error::Infeasible("no randomized sample or principal eigenvector meets the rate target".into())),
    }
}

#[derive(Debug, Clone)]
pub struct SdrOptions {
    pub n_randomizations: usize,
    pub seed: u64,
    pub gap_tol: f64,
}

impl Default for SdrOptions {
    fn default() -> Self {
        Self { n_randomizations: DEFAULT_RANDOMIZATIONS, seed: 0, gap_tol: conic::SDP_GAP_TOL }
    }
}

#[derive(Debug, Clone)]
pub struct SdrReport {
    pub beamformer: Beamformer,
    /// Exact MI of the returned beamformer, nats.
    pub mi: f64,
    /// Relaxation bound, nats.
    pub mi_upper_bound: f64,
    pub w_bar: CMatrix,
    pub sdp_iterations: usize,
    pub duality_gap: f64,
    pub used_fallback: bool,
}

pub fn solve(inst: &Instance, opts: &SdrOptions) -> Result<SdrReport> {
    let inp = SdrInputs::from_instance(inst, opts.n_randomizations)?;
    solve_inputs(&inp, opts)
}

pub fn solve_inputs(inp: &SdrInputs, opts: &SdrOptions) -> Result<SdrReport> {
    let omega1 = crate::solver_closed::feasibility_bound(&inp.h, inp.p0);
    if omega1 <= inp.omega {
        return Err(Error::Infeasible(format!(
            "rate target needs channel gain {:.6e}, at most {:.6e} is reachable",
            inp.omega, omega1
        )));
    }
    let sdp = build_sdp(inp);
    let rep = conic::solve_sdp(&sdp, opts.gap_tol)?;
    match rep.status {
        ConicStatus::Optimal => {}
        ConicStatus::Infeasible => {
            return Err(Error::Infeasible("relaxed problem has no strictly feasible point".into()))
        }
        ConicStatus::MaxIter => return Err(Error::MaxIter(rep.iterations)),
    }
    let w_bar = linalg::hermitian_part(&rep.solution.w_bar);
    let r = randomize(&w_bar, inp, opts.seed)?;
    Ok(SdrReport {
        beamformer: r.beamformer,
        mi: r.mi,
        mi_upper_bound: mi_bound(rep.objective, inp.sigma_z2),
        w_bar,
        sdp_iterations: rep.iterations,
        duality_gap: rep.duality_gap,
        used_fallback: r.used_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{self, rayleigh_channel, ScattererModel, SystemConfig};
    use crate::solver_closed::{solve_closed_form, ClosedFormInputs};
    use rand::Rng;

    fn instance(n_tx: usize, n_rx: usize, gamma2: Option<f64>, seed: u64) -> Instance {
        let cfg = SystemConfig { n_tx, n_rx, ..SystemConfig::baseline(1) };
        Instance::new(
            cfg,
            rayleigh_channel(1, n_tx, seed),
            ScattererModel::point(0.0, 1.0),
            gamma2.map(|g| ScattererModel::point(-30.0, g)),
        )
        .unwrap()
    }

    #[test]
    fn reduced_mi_matches_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (seed, g) in [(1, Some(100.0)), (2, None), (3, Some(0.5))] {
            let inst = instance(6, 6, g, seed);
            let inp = SdrInputs::from_instance(&inst, 10).unwrap();
            for _ in 0..5 {
                let w = complex_gaussian(&mut rng, 6, 1, 1.0);
                let direct = model::mutual_information(&inst, &Beamformer::new(w.clone()));
                let reduced = inp.mutual_information(&w);
                assert!((direct - reduced).abs() <= 1e-9 * direct.max(1.0), "{direct} vs {reduced}");
            }
        }
    }

    #[test]
    fn shape_and_zero_point() {
        let inst = instance(6, 6, Some(100.0), 4);
        let inp = SdrInputs::from_instance(&inst, 10).unwrap();
        let p = build_sdp(&inp);
        assert_eq!(p.dim, 6);
        assert_eq!(p.lmi_blocks.len(), 1);
        assert_eq!(p.lmi_blocks[0].size(), 2);
        // At W̄ = 0 the LMI forces t ≤ σ_Z².
        let blk = &p.lmi_blocks[0];
        let t_max = blk.constant[(0, 0)].re - blk.constant[(0, 1)].norm_sqr() / blk.constant[(1, 1)].re;
        assert_eq!(t_max, inst.config.sigma_z2);
    }

    #[test]
    fn no_interference_matches_closed_form() {
        let inst = instance(4, 4, None, 5);
        let inp = SdrInputs::from_instance(&inst, 200).unwrap();
        let rep = solve_inputs(&inp, &SdrOptions { n_randomizations: 200, ..Default::default() }).unwrap();
        let w = solve_closed_form(&ClosedFormInputs::from_instance(&inst).unwrap()).unwrap();
        let closed = model::mutual_information(&inst, &w);
        assert!((rep.mi_upper_bound - closed).abs() <= 1e-4 * closed, "{} vs {closed}", rep.mi_upper_bound);
        assert!(rep.mi <= rep.mi_upper_bound * (1.0 + 1e-6));
        assert!(rep.mi >= 0.98 * rep.mi_upper_bound);
    }

    #[test]
    fn rank_one_randomization_recovers_point() {
        let inst = instance(4, 3, Some(10.0), 6);
        let inp = SdrInputs::from_instance(&inst, 20).unwrap();
        let w0 = &inst.user_channel(0) * cr((inp.p0 / linalg::norm_sqr(&inst.user_channel(0))).sqrt());
        let w_bar = &w0 * w0.adjoint();
        let r = randomize(&w_bar, &inp, 3).unwrap();
        let want = inp.mutual_information(&w0);
        assert!((r.mi - want).abs() <= 1e-12 * want.max(1.0));
        assert!(linalg::inner(&w0, &r.beamformer.w).norm() > (1.0 - 1e-9) * inp.p0);
    }

    #[test]
    fn randomization_is_deterministic_and_feasible() {
        let inst = instance(6, 6, Some(100.0), 7);
        let opts = SdrOptions { n_randomizations: 300, seed: 11, ..Default::default() };
        let a = solve(&inst, &opts).unwrap();
        let b = solve(&inst, &opts).unwrap();
        assert_eq!(a.beamformer, b.beamformer);
        let w = &a.beamformer.w;
        assert!(linalg::norm_sqr(w) <= inst.config.p0 * (1.0 + 1e-9));
        assert!(linalg::inner(&inst.user_channel(0), w).norm_sqr() >= inst.config.omega(0) - 1e-9);
        assert!(a.mi <= a.mi_upper_bound + 1e-9);
    }

    #[test]
    fn relaxation_bounds_random_feasible_points() {
        let inst = instance(4, 4, Some(100.0), 8);
        let inp = SdrInputs::from_instance(&inst, 100).unwrap();
        let rep = solve_inputs(&inp, &SdrOptions { n_randomizations: 100, ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        for _ in 0..2000 {
            let w = complex_gaussian(&mut rng, 4, 1, 1.0);
            let w = &w * cr((inp.p0 * rng.random_range(0.1..1.0) / linalg::norm_sqr(&w)).sqrt());
            if rate_feasible(&inp, &w) {
                checked += 1;
                assert!(inp.mutual_information(&w) <= rep.mi_upper_bound + 1e-7);
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn infeasible_target_rejected() {
        let mut inst = instance(4, 4, None, 10);
        inst.config.rate_targets = vec![40.0];
        assert!(matches!(solve(&inst, &SdrOptions::default()), Err(Error::Infeasible(_))));
    }
}
