//! Single-user, interference-free beamformer in closed form.
//!
//! With `R_C = 0` and a point target the objective collapses to `|aᴴw|²`, so
//! the problem is a two-dimensional trade-off between aligning with the target
//! steering vector `a` and keeping enough gain on the user channel `h`.

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix};
use crate::model::{steering_vector, Beamformer, Instance};

/// `|1 − r|` below which `h` and `a` are treated as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ClosedFormInputs {
    /// Target steering vector `a(θ)`.
    pub a: CMatrix,
    /// User channel `h`.
    pub h: CMatrix,
    pub p0: f64,
    /// Required received power `(2^r − 1) σ_N²`.
    pub omega: f64,
}

impl ClosedFormInputs {
    /// Inputs for a single-user instance with a point target.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let cfg = &inst.config;
        if cfg.n_users != 1 {
            return Err(Error::InvalidInput("closed form needs exactly one user".into()));
        }
        if inst.has_interference() || inst.target.angles_deg.len() != 1 {
            return Err(Error::InvalidInput("closed form needs a point target and no interference".into()));
        }
        Ok(Self {
            a: steering_vector(inst.target.angles_deg[0], cfg.n_tx, cfg.spacing),
            h: inst.user_channel(0),
            p0: cfg.p0,
            omega: cfg.omega(0),
        })
    }
}

/// Best achievable `|hᴴw|²` under `‖w‖² ≤ P0`, namely `P0 ‖h‖²`.
pub fn feasibility_bound(h: &CMatrix, p0: f64) -> f64 {
    p0 * linalg::norm_sqr(h)
}

pub fn solve_closed_form(inp: &ClosedFormInputs) -> Result<Beamformer> {
    if !(inp.p0 > 0.0) || !(inp.omega >= 0.0) {
        return Err(Error::InvalidInput("need p0 > 0 and omega >= 0".into()));
    }
    if inp.a.shape() != inp.h.shape() || inp.a.ncols() != 1 {
        return Err(Error::InvalidInput("a and h must be columns of equal length".into()));
    }
    let omega1 = feasibility_bound(&inp.h, inp.p0);
    if omega1 < inp.omega {
        return Err(Error::Infeasible(format!(
            "required channel gain {:.6e} exceeds the attainable {:.6e}",
            inp.omega, omega1
        )));
    }
    let sp = inp.p0.sqrt();
    let na = linalg::norm_sqr(&inp.a).sqrt();
    let nh = linalg::norm_sqr(&inp.h).sqrt();
    if na == 0.0 {
        return Err(Error::InvalidInput("steering vector is zero".into()));
    }
    let a_hat = &inp.a * cr(1.0 / na);
    let h_hat = &inp.h * cr(1.0 / nh);
    if omega1 == inp.omega {
        return Ok(Beamformer::new(h_hat * cr(sp)));
    }

    let ha = linalg::inner(&inp.h, &inp.a);
    // Pointing straight at the target already serves the user.
    if ha.norm_sqr() > inp.omega * na * na / inp.p0 {
        return Ok(Beamformer::new(a_hat * cr(sp)));
    }
    let r = ha.norm() / (na * nh);
    if (1.0 - r).abs() <= COLLINEAR_TOL {
        return Ok(Beamformer::new(h_hat * cr(sp)));
    }
    let t = inp.omega / omega1;
    let u2 = ((1.0 - t) / (1.0 - r * r)).max(0.0).sqrt();
    // Phase that aligns the h-component with a; arbitrary when h ⟂ a.
    let phase = if ha.norm() > 0.0 { ha / ha.norm() } else { cr(1.0) };
    let z1 = cr(sp * (t.sqrt() - u2 * r)) * phase;
    let z2 = sp * u2;
    Ok(Beamformer::new(h_hat * z1 + a_hat * cr(z2)))
}
