//! Exterior Schwarzschild kinematics for a static detector.
//!
//! Units are geometrized with the Schwarzschild radius set to one (2M = 1),
//! so the horizon sits at r = 1 and the Hawking temperature is 1/(4π).

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Hawking temperature in units of 1/(2M).
pub const HAWKING_TEMPERATURE: f64 = 1.0 / (4.0 * PI);

/// Frequency conjugate to Schwarzschild time `t` (as seen from infinity).
///
/// Mode functions, scattering data and the thermal factors are all labelled
/// by this frequency.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KillingFrequency(pub f64);

/// Frequency conjugate to the detector's proper time.
///
/// Switching functions and the detector gap live in this frame.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LocalFrequency(pub f64);

impl KillingFrequency {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl LocalFrequency {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for KillingFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LocalFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A detector held at fixed areal radius on the polar axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorWorldline {
    r: f64,
    sqrt_f: f64,
}

impl DetectorWorldline {
    pub fn new(r: f64) -> Result<Self> {
        let sqrt_f = redshift(r)?;
        Ok(Self { r, sqrt_f })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// √(1 − 1/r), the ratio of proper time to Schwarzschild time.
    pub fn redshift(&self) -> f64 {
        self.sqrt_f
    }

    pub fn to_local(&self, omega: KillingFrequency) -> LocalFrequency {
        LocalFrequency(omega.0 / self.sqrt_f)
    }

    pub fn to_killing(&self, omega: LocalFrequency) -> KillingFrequency {
        KillingFrequency(omega.0 * self.sqrt_f)
    }

    pub fn local_temperature(&self) -> f64 {
        HAWKING_TEMPERATURE / self.sqrt_f
    }
}

fn check_exterior(r: f64) -> Result<()> {
    if r.is_nan() || r <= 1.0 {
        return Err(Error::domain(format!("radius {r} is not outside the horizon r = 1")));
    }
    Ok(())
}

/// f(r) = 1 − 1/r.
pub fn metric_factor(r: f64) -> f64 {
    (r - 1.0) / r
}

/// √f(r), the gravitational redshift factor of a static observer.
pub fn redshift(r: f64) -> Result<f64> {
    check_exterior(r)?;
    if r.is_infinite() {
        return Ok(1.0);
    }
    Ok(metric_factor(r).sqrt())
}

/// Tortoise coordinate r* = r + ln(r − 1).
pub fn tortoise(r: f64) -> Result<f64> {
    check_exterior(r)?;
    Ok(r + (r - 1.0).ln())
}

/// Inverse of [`tortoise`], by safeguarded Newton iteration on u = r − 1.
pub fn inverse_tortoise(rstar: f64) -> Result<f64> {
    if !rstar.is_finite() {
        return Err(Error::domain(format!("tortoise coordinate {rstar} is not finite")));
    }
    Ok(1.0 + inverse_tortoise_offset(rstar))
}

/// Solves u + ln u = r* − 1 for u = r − 1 > 0.
///
/// Working in u keeps full relative precision next to the horizon, where
/// r − 1 underflows the resolution of r itself.
pub(crate) fn inverse_tortoise_offset(rstar: f64) -> f64 {
    let target = rstar - 1.0;
    // g(u) = u + ln u − target is increasing and concave, so Newton steps
    // never overshoot the root from below; only positivity needs guarding.
    let mut u = if rstar > 2.0 {
        rstar - 1.0 - (rstar - 1.0).ln()
    } else {
        target.exp()
    };
    for _ in 0..200 {
        let g = u + u.ln() - target;
        let mut next = u - g / (1.0 + 1.0 / u);
        if next <= 0.0 {
            next = 0.1 * u;
        }
        if (next - u).abs() <= 2.0 * f64::EPSILON * next {
            return next;
        }
        u = next;
    }
    u
}

/// Detector-frame frequency ω̃ = ω/√f(r) of a mode with Killing frequency ω.
pub fn local_frequency(omega: KillingFrequency, r: f64) -> Result<LocalFrequency> {
    if omega.0 < 0.0 {
        return Err(Error::domain(format!("frequency {} is negative", omega.0)));
    }
    Ok(LocalFrequency(omega.0 / redshift(r)?))
}

/// Killing frequency ω = ω̃·√f(r); maps a proper gap Ω to Ω̃.
pub fn killing_frequency(omega: LocalFrequency, r: f64) -> Result<KillingFrequency> {
    Ok(KillingFrequency(omega.0 * redshift(r)?))
}

/// Tolman temperature T_H/√f(r) seen by the static detector.
pub fn local_temperature(r: f64) -> Result<f64> {
    let s = redshift(r)?;
    Ok(HAWKING_TEMPERATURE / s)
}
