//! Adaptive eighth-order Runge-Kutta integration of the radial equation in
//! the tortoise coordinate:
//!
//! ```text
//! d²ψ/dr*² + [ω² − f(r)(l(l+1)/r² + 1/r³)] ψ = 0
//! ```
//!
//! The state carries u = r − 1 alongside ψ and dψ/dr*, advanced with
//! du/dr* = u/(1 + u), so no tortoise inversion is needed along the path.

use num_complex::Complex64;

use super::tableau::{A, B, E3, E5, STAGES};
use crate::error::{Error, Result};
use crate::spacetime::{inverse_tortoise_offset, tortoise};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;
const ERROR_ESTIMATOR_ORDER: f64 = 7.0;

type State = [f64; 5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Drop the potential term; solutions are then exact plane waves.
    pub free: bool,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 2_000_000, free: false }
    }
}

/// Value and tortoise derivative of a radial solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialData {
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl RadialData {
    pub fn new(psi: Complex64, dpsi: Complex64) -> Self {
        Self { psi, dpsi }
    }

    pub fn conj(self) -> Self {
        Self { psi: self.psi.conj(), dpsi: self.dpsi.conj() }
    }

    /// W[a, b] = a b' − a' b with primes in r*.
    pub fn wronskian(self, other: RadialData) -> Complex64 {
        self.psi * other.dpsi - self.dpsi * other.psi
    }

    fn is_finite(self) -> bool {
        self.psi.re.is_finite()
            && self.psi.im.is_finite()
            && self.dpsi.re.is_finite()
            && self.dpsi.im.is_finite()
    }
}

/// Running DOP853 integrator for one solution; can be advanced through a
/// sequence of radii while keeping its step size.
#[derive(Debug, Clone)]
pub struct RadialIntegrator {
    omega_sq: f64,
    centrifugal: f64,
    cfg: OdeConfig,
    t: f64,
    y: State,
    f: State,
    h: Option<f64>,
    w0: Complex64,
    drift: f64,
    steps: usize,
    rejected: usize,
}

impl RadialIntegrator {
    pub fn new(l: u32, omega: f64, r: f64, init: RadialData, cfg: OdeConfig) -> Result<Self> {
        let t = tortoise(r)?;
        if !init.is_finite() {
            return Err(Error::NonFinite("in initial data".into()));
        }
        let y = [r - 1.0, init.psi.re, init.psi.im, init.dpsi.re, init.dpsi.im];
        let mut it = Self {
            omega_sq: omega * omega,
            centrifugal: if cfg.free { 0.0 } else { f64::from(l) * f64::from(l + 1) },
            cfg,
            t,
            y,
            f: [0.0; 5],
            h: None,
            w0: init.conj().wronskian(init),
            drift: 0.0,
            steps: 0,
            rejected: 0,
        };
        it.f = it.rhs(&it.y);
        Ok(it)
    }

    pub fn radius(&self) -> f64 {
        1.0 + self.y[0]
    }

    pub fn tortoise(&self) -> f64 {
        self.t
    }

    pub fn data(&self) -> RadialData {
        RadialData {
            psi: Complex64::new(self.y[1], self.y[2]),
            dpsi: Complex64::new(self.y[3], self.y[4]),
        }
    }

    /// Largest relative change of W[ψ̄, ψ] seen so far, normalised by
    /// max(|W_0|, |ψ||ψ'|) at each step.
    pub fn wronskian_drift(&self) -> f64 {
        self.drift
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    fn rhs(&self, y: &State) -> State {
        let u = y[0];
        let r = 1.0 + u;
        let potential = if self.cfg.free {
            0.0
        } else {
            let f = u / r;
            f * (self.centrifugal + 1.0 / r) / (r * r)
        };
        let k = potential - self.omega_sq;
        [u / r, y[3], y[4], k * y[1], k * y[2]]
    }

    fn scale(&self, a: &State, b: &State) -> [f64; 3] {
        let m = |i: usize, j: usize, s: &State| s[i].hypot(s[j]);
        let rtol = self.cfg.rtol;
        [
            rtol * a[0].abs().max(b[0].abs()) + f64::MIN_POSITIVE,
            self.cfg.atol + rtol * m(1, 2, a).max(m(1, 2, b)),
            self.cfg.atol + rtol * m(3, 4, a).max(m(3, 4, b)),
        ]
    }

    fn grouped_norm_sq(v: &State, scale: &[f64; 3]) -> f64 {
        (v[0] / scale[0]).powi(2)
            + (v[1].hypot(v[2]) / scale[1]).powi(2)
            + (v[3].hypot(v[4]) / scale[2]).powi(2)
    }

    fn initial_step(&self, direction: f64, span: f64) -> f64 {
        let s = self.scale(&self.y, &self.y);
        let n = 5.0;
        let d0 = (Self::grouped_norm_sq(&self.y, &s) / n).sqrt();
        let d1 = (Self::grouped_norm_sq(&self.f, &s) / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = self.y;
        for i in 0..5 {
            y1[i] += direction * h0 * self.f[i];
        }
        let f1 = self.rhs(&y1);
        let mut df = [0.0; 5];
        for i in 0..5 {
            df[i] = f1[i] - self.f[i];
        }
        let d2 = (Self::grouped_norm_sq(&df, &s) / n).sqrt() / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / (ERROR_ESTIMATOR_ORDER + 1.0))
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// One trial step of size h (signed). Returns the new state, its
    /// derivative and the error norm.
    fn trial(&self, h: f64) -> (State, State, f64) {
        let mut k = [[0.0; 5]; STAGES + 1];
        k[0] = self.f;
        for s in 1..STAGES {
            let mut ys = self.y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..5 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = self.rhs(&ys);
        }
        let mut y_new = self.y;
        for (s, ks) in k.iter().enumerate().take(STAGES) {
            let b = B[s];
            if b != 0.0 {
                for i in 0..5 {
                    y_new[i] += h * b * ks[i];
                }
            }
        }
        let f_new = self.rhs(&y_new);
        k[STAGES] = f_new;

        let scale = self.scale(&self.y, &y_new);
        let mut err5 = [0.0; 5];
        let mut err3 = [0.0; 5];
        for (s, ks) in k.iter().enumerate() {
            for i in 0..5 {
                err5[i] += E5[s] * ks[i];
                err3[i] += E3[s] * ks[i];
            }
        }
        let e5 = Self::grouped_norm_sq(&err5, &scale);
        let e3 = Self::grouped_norm_sq(&err3, &scale);
        let err = if e5 == 0.0 && e3 == 0.0 {
            0.0
        } else {
            h.abs() * e5 / ((e5 + 0.01 * e3) * 5.0).sqrt()
        };
        (y_new, f_new, err)
    }

    /// Advances to the radius `r_to`.
    pub fn advance_to(&mut self, r_to: f64) -> Result<RadialData> {
        let target = tortoise(r_to)?;
        self.advance_to_tortoise(target)?;
        // Land exactly on the requested radius.
        self.y[0] = r_to - 1.0;
        Ok(self.data())
    }

    pub fn advance_to_tortoise(&mut self, target: f64) -> Result<RadialData> {
        let span = target - self.t;
        if span == 0.0 {
            return Ok(self.data());
        }
        let direction = span.signum();
        let mut h = match self.h {
            Some(h) => h.min(span.abs()),
            None => self.initial_step(direction, span.abs()),
        };
        let mut last_rejected = false;
        loop {
            let remaining = (target - self.t).abs();
            if remaining == 0.0 {
                break;
            }
            let min_step = 10.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h < min_step {
                return Err(Error::StepUnderflow { at: self.t, step: h });
            }
            let finishing = h >= remaining;
            let step = if finishing { remaining } else { h };
            if self.steps + self.rejected >= self.cfg.max_steps {
                return Err(Error::StepBudget(self.cfg.max_steps));
            }
            let (y_new, f_new, err) = self.trial(direction * step);
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if step <= 10.0 * min_step {
                    return Err(Error::NonFinite(format!("at r* = {}", self.t)));
                }
                h = step * MIN_FACTOR;
                self.rejected += 1;
                last_rejected = true;
                continue;
            }
            if err < 1.0 {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
                };
                if last_rejected {
                    factor = factor.min(1.0);
                }
                self.t = if finishing { target } else { self.t + direction * step };
                self.y = y_new;
                self.f = f_new;
                self.steps += 1;
                self.track_wronskian();
                last_rejected = false;
                // Keep the unclamped step for the next leg.
                h = step * factor;
                if !finishing {
                    self.h = Some(h);
                } else {
                    self.h = Some(self.h.unwrap_or(h).max(h));
                }
            } else {
                h = step * (SAFETY * err.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
                self.rejected += 1;
                last_rejected = true;
            }
        }
        let d = self.data();
        if !d.is_finite() {
            return Err(Error::NonFinite(format!("at r* = {}", self.t)));
        }
        Ok(d)
    }

    fn track_wronskian(&mut self) {
        let d = self.data();
        let w = d.conj().wronskian(d);
        let denom = self.w0.norm().max(d.psi.norm() * d.dpsi.norm());
        if denom > 0.0 {
            self.drift = self.drift.max((w - self.w0).norm() / denom);
        }
    }
}

/// Final data and diagnostics of one integration.
#[derive(Debug, Clone, Copy)]
pub struct Integration {
    pub data: RadialData,
    pub wronskian_drift: f64,
    pub steps: usize,
}

/// Integrates the radial equation from `r_from` to `r_to`.
pub fn integrate_radial(
    l: u32,
    omega: f64,
    r_from: f64,
    r_to: f64,
    init: RadialData,
    cfg: OdeConfig,
) -> Result<Integration> {
    if !(r_from > 1.0 && r_to > 1.0) {
        return Err(Error::domain(format!(
            "integration endpoints must lie outside the horizon: {r_from} -> {r_to}"
        )));
    }
    let mut it = RadialIntegrator::new(l, omega, r_from, init, cfg)?;
    let data = it.advance_to(r_to)?;
    Ok(Integration { data, wronskian_drift: it.wronskian_drift(), steps: it.steps() })
}

/// Radius reached from the tortoise coordinate, for callers that work in r*.
pub fn radius_at(rstar: f64) -> f64 {
    1.0 + inverse_tortoise_offset(rstar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(omega: f64, rstar: f64, sign: f64) -> RadialData {
        let e = Complex64::new(0.0, sign * omega * rstar).exp();
        RadialData::new(e, Complex64::new(0.0, sign * omega) * e)
    }

    #[test]
    fn free_plane_wave_is_preserved() {
        let omega = 0.7;
        let cfg = OdeConfig { free: true, ..OdeConfig::default() };
        let r0 = 2.0;
        let s0 = tortoise(r0).unwrap();
        let r1 = radius_at(s0 + 100.0);
        let out = integrate_radial(3, omega, r0, r1, plane(omega, s0, -1.0), cfg).unwrap();
        let s1 = tortoise(r1).unwrap();
        let exact = plane(omega, s1, -1.0);
        assert!((out.data.psi - exact.psi).norm() < 1e-8, "{:?}", out.data);
        assert!((out.data.dpsi - exact.dpsi).norm() < 1e-8);
    }

    #[test]
    fn wronskian_of_two_solutions_is_constant() {
        let (l, omega) = (2, 0.4);
        let cfg = OdeConfig::default();
        let a0 = RadialData::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let b0 = RadialData::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let w0 = a0.wronskian(b0);
        let mut a = RadialIntegrator::new(l, omega, 1.2, a0, cfg).unwrap();
        let mut b = RadialIntegrator::new(l, omega, 1.2, b0, cfg).unwrap();
        for r in [1.5, 3.0, 10.0, 40.0, 120.0] {
            let da = a.advance_to(r).unwrap();
            let db = b.advance_to(r).unwrap();
            let w = da.wronskian(db);
            let scale = w0.norm().max(da.psi.norm() * db.dpsi.norm());
            assert!((w - w0).norm() / scale < 1e-8, "r={r}: {w}");
        }
        assert!(a.wronskian_drift() < 1e-8);
    }

    #[test]
    fn inward_and_outward_agree() {
        let (l, omega) = (1, 0.3);
        let init = RadialData::new(Complex64::new(0.3, -1.0), Complex64::new(0.1, 0.2));
        let cfg = OdeConfig::default();
        let out = integrate_radial(l, omega, 2.0, 30.0, init, cfg).unwrap();
        let back = integrate_radial(l, omega, 30.0, 2.0, out.data, cfg).unwrap();
        assert!((back.data.psi - init.psi).norm() < 1e-8);
        assert!((back.data.dpsi - init.dpsi).norm() < 1e-8);
    }

    #[test]
    fn rejects_horizon_endpoint() {
        let init = RadialData::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert!(integrate_radial(0, 0.1, 1.0, 2.0, init, OdeConfig::default()).is_err());
    }

    #[test]
    fn non_finite_initial_data() {
        let init = RadialData::new(Complex64::new(f64::NAN, 0.0), Complex64::new(0.0, 0.0));
        let err = integrate_radial(0, 0.1, 2.0, 3.0, init, OdeConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn step_budget_reported() {
        let init = RadialData::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let cfg = OdeConfig { max_steps: 5, ..OdeConfig::default() };
        let err = integrate_radial(0, 2.0, 2.0, 500.0, init, cfg).unwrap_err();
        assert!(matches!(err, Error::StepBudget(5)));
    }
}
