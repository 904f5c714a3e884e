//! Horizon-side series solution.
//!
//! Near r = 1 the radial equation has the solution
//! ψ = e^{−iωr*} Σ a_n x^n with x = (r − 1)/r, where a_{−1} = 0, a_0 = 1 and
//!
//! ```text
//! (1 + n)(1 + n − 2iω) a_{n+1} + (−1 − l(l+1) − 2n(n+1)) a_n + n² a_{n−1} = 0.
//! ```

use num_complex::Complex64;

use super::ode::RadialData;
use crate::error::{Error, Result};
use crate::spacetime::metric_factor;

pub const DEFAULT_MAX_TERMS: usize = 10_000;

/// Coefficients of the horizon series for one (l, ω), truncated so that the
/// tail is below tolerance at a given evaluation radius.
#[derive(Debug, Clone)]
pub struct JaffeSeries {
    pub l: u32,
    pub omega: f64,
    pub coefficients: Vec<Complex64>,
    /// Largest radius at which the truncation was certified.
    pub r_max: f64,
    pub tol: f64,
}

/// Residual of the recurrence at interior index n (1 ≤ n < N).
pub fn recurrence_residual(a: &[Complex64], l: u32, omega: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let ll = f64::from(l) * f64::from(l + 1);
    let lead = Complex64::new((1.0 + nf) * (1.0 + nf), -2.0 * omega * (1.0 + nf));
    lead * a[n + 1] + (-1.0 - ll - 2.0 * nf * (nf + 1.0)) * a[n] + nf * nf * a[n - 1]
}

/// Generates coefficients until both the current term and its successor at
/// x = (r_max − 1)/r_max fall below `tol` relative to the partial sum.
pub fn jaffe_coefficients(l: u32, omega: f64, r_max: f64, tol: f64) -> Result<JaffeSeries> {
    jaffe_coefficients_capped(l, omega, r_max, tol, DEFAULT_MAX_TERMS)
}

pub fn jaffe_coefficients_capped(
    l: u32,
    omega: f64,
    r_max: f64,
    tol: f64,
    max_terms: usize,
) -> Result<JaffeSeries> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(format!("frequency {omega} must be positive")));
    }
    if !(r_max > 1.0) {
        return Err(Error::domain(format!("series radius {r_max} must exceed 1")));
    }
    let x = (r_max - 1.0) / r_max;
    let ll = f64::from(l) * f64::from(l + 1);

    let mut a = vec![Complex64::new(1.0, 0.0)];
    let mut prev = Complex64::new(0.0, 0.0);
    let mut sum = 1.0_f64;
    let mut xn = 1.0;
    let mut small_run = 0;
    loop {
        let n = a.len() - 1;
        if n >= max_terms {
            return Err(Error::NonConvergence(format!(
                "horizon series for l = {l}, omega = {omega} needs more than {max_terms} terms at r = {r_max}"
            )));
        }
        let nf = n as f64;
        let lead = Complex64::new((1.0 + nf) * (1.0 + nf), -2.0 * omega * (1.0 + nf));
        let cur = a[n];
        let next = ((1.0 + ll + 2.0 * nf * (nf + 1.0)) * cur - nf * nf * prev) / lead;
        prev = cur;
        a.push(next);
        xn *= x;
        let term = next.norm() * xn;
        sum = sum.max(term);
        if term <= tol * sum {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    Ok(JaffeSeries { l, omega, coefficients: a, r_max, tol })
}

impl JaffeSeries {
    pub fn new(l: u32, omega: f64, r_max: f64, tol: f64) -> Result<Self> {
        jaffe_coefficients(l, omega, r_max, tol)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Value and tortoise derivative of the series solution at `r`.
    pub fn eval(&self, r: f64) -> Result<RadialData> {
        if !(r > 1.0) {
            return Err(Error::domain(format!("horizon series needs r > 1, got {r}")));
        }
        if r > self.r_max * (1.0 + 1e-12) {
            return Err(Error::NonConvergence(format!(
                "horizon series certified up to r = {}, requested r = {r}",
                self.r_max
            )));
        }
        let x = (r - 1.0) / r;
        // Horner for S(x) and S'(x).
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            ds = ds * x + s;
            s = s * x + c;
        }
        let u = r - 1.0;
        let rstar = r + u.ln();
        let phase = Complex64::new(0.0, -self.omega * rstar).exp();
        let dx_drstar = metric_factor(r) / (r * r);
        let psi = phase * s;
        let dpsi = phase * (Complex64::new(0.0, -self.omega) * s + ds * dx_drstar);
        Ok(RadialData::new(psi, dpsi))
    }
}
