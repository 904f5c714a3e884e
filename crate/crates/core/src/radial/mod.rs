//! Radial scattering problem for one (l, ω): horizon series, asymptotic
//! Coulomb solution, ODE bridge and normalisation into "in" and "up" modes.

mod coulomb;
mod gamma;
mod jaffe;
mod ode;
mod tableau;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use coulomb::{asymptotic_sum, coulomb_h_plus, coulomb_phase, AsymptoticSum, CoulombValue};
pub use gamma::{complex_log_gamma, gamma_phase};
pub use jaffe::{jaffe_coefficients, jaffe_coefficients_capped, recurrence_residual, JaffeSeries};
pub use ode::{integrate_radial, radius_at, Integration, OdeConfig, RadialData, RadialIntegrator};

use crate::error::{Error, Result};
use crate::spacetime::metric_factor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Radius where the horizon series hands over to the integrator.
    pub r_near: f64,
    /// Lower bound on the far matching radius.
    pub r_far_min: f64,
    pub series_tol: f64,
    pub coulomb_tol: f64,
    /// Bound on the reflection induced by the Coulomb approximation of the
    /// potential beyond the far matching radius.
    pub far_potential_tol: f64,
    pub max_far_doublings: u32,
    /// Unitarity defect above which a solve is reported as failed.
    pub unitarity_limit: f64,
    /// Wronskian drift above which the integration is repeated with
    /// tolerances ten times tighter, at most `max_refinements` times.
    pub drift_limit: f64,
    pub max_refinements: u32,
    pub ode: OdeConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            r_near: 1.5,
            r_far_min: 50.0,
            series_tol: 1e-15,
            coulomb_tol: 1e-10,
            far_potential_tol: 1e-9,
            max_far_doublings: 3,
            unitarity_limit: 1e-4,
            drift_limit: 1e-8,
            max_refinements: 2,
            ode: OdeConfig::default(),
        }
    }
}

/// Parameters of the far-field Coulomb solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombAsymptotic {
    pub nu: Complex64,
    pub eta: f64,
    /// Phase removed so that the up-solution approaches e^{+iωr*}.
    pub theta: Complex64,
}

impl CoulombAsymptotic {
    pub fn new(l: u32, omega: f64) -> Result<Self> {
        let nu = coulomb_order(l, omega);
        let eta = -omega;
        let sigma = coulomb_phase(nu, eta)?;
        let theta = omega * (2.0 * omega).ln() - nu * (PI / 2.0) + sigma;
        Ok(Self { nu, eta, theta })
    }
}

/// ν with ν(ν + 1) = l(l + 1) − 3ω², principal square root.
pub fn coulomb_order(l: u32, omega: f64) -> Complex64 {
    let two_l1 = 2.0 * f64::from(l) + 1.0;
    let disc = Complex64::new(two_l1 * two_l1 - 12.0 * omega * omega, 0.0);
    (disc.sqrt() - 1.0) / 2.0
}

/// Effective potential f(r)(l(l+1)/r² + 1/r³).
pub fn potential(l: u32, r: f64) -> f64 {
    let ll = f64::from(l) * f64::from(l + 1);
    metric_factor(r) * (ll + 1.0 / r) / (r * r)
}

/// Outermost radius where ω² equals the potential, if the potential barrier
/// exceeds ω² at all.
pub fn outer_turning_point(l: u32, omega: f64) -> Option<f64> {
    let w2 = omega * omega;
    // The barrier peak lies in (1, 2) for every l.
    let (mut a, mut b) = (1.0_f64, 2.0_f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if potential(l, c) > potential(l, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let peak = 0.5 * (a + b);
    if potential(l, peak) <= w2 {
        return None;
    }
    let ll = f64::from(l) * f64::from(l + 1);
    let mut lo = peak;
    let mut hi = ((ll + 1.0).sqrt() / omega).max(2.0 * peak) * 1.01;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if potential(l, mid) > w2 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Initial far matching radius before any Coulomb-precision doubling.
pub fn far_radius(l: u32, omega: f64, r_det: f64, cfg: &SolverConfig) -> f64 {
    let ll = f64::from(l) * f64::from(l + 1);
    let w2 = omega * omega;
    let tail = ((4.0 * w2 - ll).abs() / (4.0 * w2 * cfg.far_potential_tol)).cbrt();
    let turning = outer_turning_point(l, omega).unwrap_or(0.0);
    cfg.r_far_min.max(20.0 / omega).max(3.0 * turning).max(tail).max(2.0 * r_det)
}

/// Up-solution at large r from the Coulomb series, normalised to approach
/// e^{+iωr*} with unit coefficient.
pub fn far_up_data(l: u32, omega: f64, r: f64, tol: f64) -> Result<RadialData> {
    let nu = coulomb_order(l, omega);
    let s = asymptotic_sum(nu, -omega, omega * r, tol)?;
    let i = Complex64::i();
    // Phase of H⁺ with the constant phase shift already removed.
    let phase = (i * (omega * r + omega * r.ln())).exp();
    let h = phase * s.sum;
    let dh_dr = phase * (i * (omega + omega / r) * s.sum + omega * s.dsum);
    let g = (r / (r - 1.0)).sqrt();
    let dg_dr = -g / (2.0 * r * (r - 1.0));
    let psi = g * h;
    let dpsi = metric_factor(r) * (dg_dr * h + g * dh_dr);
    Ok(RadialData::new(psi, dpsi))
}

/// Normalised in and up modes for one (l, ω) at a detector radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub l: u32,
    pub omega: f64,
    pub r_det: f64,
    pub a_in: Complex64,
    pub b_in: Complex64,
    pub a_up: Complex64,
    pub b_up: Complex64,
    /// Radial mode R = ψ/r at the detector.
    pub r_in: Complex64,
    pub r_up: Complex64,
    pub wronskian_drift: f64,
    pub r_far: f64,
}

impl ModeSolution {
    pub fn unitarity_defect_in(&self) -> f64 {
        (self.a_in.norm_sqr() + self.b_in.norm_sqr() - 1.0).abs()
    }

    pub fn unitarity_defect_up(&self) -> f64 {
        (self.a_up.norm_sqr() + self.b_up.norm_sqr() - 1.0).abs()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect_in().max(self.unitarity_defect_up())
    }

    pub fn reciprocity_defect(&self) -> f64 {
        (self.b_in.norm() - self.b_up.norm()).abs()
    }

    /// (|R_in|², |R_up|²)
    pub fn amplitudes(&self) -> (f64, f64) {
        (self.r_in.norm_sqr(), self.r_up.norm_sqr())
    }
}

pub fn solve_modes(l: u32, omega: f64, r_det: f64) -> Result<ModeSolution> {
    solve_modes_with(l, omega, r_det, &SolverConfig::default())
}

pub fn amplitude_sq(l: u32, omega: f64, r_det: f64) -> Result<(f64, f64)> {
    Ok(solve_modes(l, omega, r_det)?.amplitudes())
}

pub fn solve_modes_with(l: u32, omega: f64, r_det: f64, cfg: &SolverConfig) -> Result<ModeSolution> {
    let mut cfg = *cfg;
    let mut sol = solve_once(l, omega, r_det, &cfg)?;
    for _ in 0..cfg.max_refinements {
        if sol.wronskian_drift <= cfg.drift_limit {
            break;
        }
        cfg.ode.rtol /= 10.0;
        cfg.ode.atol /= 10.0;
        sol = solve_once(l, omega, r_det, &cfg)?;
    }
    Ok(sol)
}

fn solve_once(l: u32, omega: f64, r_det: f64, cfg: &SolverConfig) -> Result<ModeSolution> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(format!("frequency {omega} must be positive")));
    }
    if !(r_det > 1.0 && r_det.is_finite()) {
        return Err(Error::domain(format!("detector radius {r_det} must exceed 1")));
    }
    let r_near = cfg.r_near;
    let series = jaffe_coefficients(l, omega, r_near, cfg.series_tol)?;
    let horizon = series.eval(r_near)?;
    let horizon_at_det = if r_det < r_near { Some(series.eval(r_det)?) } else { None };

    let mut r_far = far_radius(l, omega, r_det, cfg);
    let mut attempt = 0;
    let far = loop {
        match far_up_data(l, omega, r_far, cfg.coulomb_tol) {
            Ok(d) => break d,
            Err(Error::Precision { .. }) if attempt < cfg.max_far_doublings => {
                attempt += 1;
                r_far *= 2.0;
            }
            Err(e) => return Err(e),
        }
    };

    // In-branch: unit transmitted wave at the horizon, carried outwards.
    let mut out = RadialIntegrator::new(l, omega, r_near, horizon, cfg.ode)?;
    let in_det = match horizon_at_det {
        Some(d) => d,
        None => out.advance_to(r_det)?,
    };
    let in_far = out.advance_to(r_far)?;
    let far_conj = far.conj();
    let alpha = in_far.wronskian(far) / far_conj.wronskian(far);
    let beta = in_far.wronskian(far_conj) / far.wronskian(far_conj);

    // Up-branch: unit outgoing wave at infinity, carried inwards.
    let mut inward = RadialIntegrator::new(l, omega, r_far, far, cfg.ode)?;
    let up_det = if horizon_at_det.is_none() { Some(inward.advance_to(r_det)?) } else { None };
    let up_near = inward.advance_to(r_near)?;
    // Deep in a barrier the horizon pair is numerically almost parallel, so
    // its Wronskian is taken from the horizon limit, W[J, J̄] = 2iω.
    let pair = Complex64::new(0.0, 2.0 * omega);
    let gamma = up_near.wronskian(horizon) / -pair;
    let delta = up_near.wronskian(horizon.conj()) / pair;
    let up_det_psi = match (up_det, horizon_at_det) {
        (Some(d), _) => d.psi,
        (None, Some(h)) => gamma * h.psi.conj() + delta * h.psi,
        (None, None) => unreachable!(),
    };

    let sol = ModeSolution {
        l,
        omega,
        r_det,
        a_in: beta / alpha,
        b_in: alpha.inv(),
        a_up: delta / gamma,
        b_up: gamma.inv(),
        r_in: in_det.psi / alpha / r_det,
        r_up: up_det_psi / gamma / r_det,
        wronskian_drift: out.wronskian_drift().max(inward.wronskian_drift()),
        r_far,
    };
    let finite = [sol.a_in, sol.b_in, sol.a_up, sol.b_up, sol.r_in, sol.r_up]
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        return Err(Error::NonFinite(format!("in mode coefficients for l = {l}, omega = {omega}")));
    }
    let defect = sol.unitarity_defect();
    if defect > cfg.unitarity_limit {
        return Err(Error::Unitarity { l, omega, defect });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests;
