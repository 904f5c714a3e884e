//! Outgoing Coulomb wavefunction H⁺_ν(η, ρ) of complex order, from its
//! large-ρ asymptotic expansion.
//!
//! With u = e^{iΘ} Σ c_k ρ^{−k} and Θ = ρ − η ln 2ρ − νπ/2 + σ_ν(η), the
//! Coulomb equation u'' + (1 − 2η/ρ − ν(ν+1)/ρ²) u = 0 gives
//!
//! ```text
//! c_{k+1} = (k − ν + iη)(k + ν + 1 + iη) / (2i (k+1)) · c_k,   c_0 = 1.
//! ```
//!
//! The series is asymptotic; it is summed up to its smallest term.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::complex_log_gamma;
use crate::error::{Error, Result};

const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy)]
pub struct CoulombValue {
    pub h: Complex64,
    /// dH⁺/dρ
    pub dh: Complex64,
    /// Number of terms kept.
    pub terms: usize,
    pub truncation: f64,
}

/// σ_ν(η) = ph Γ(ν + 1 + iη).
pub fn coulomb_phase(nu: Complex64, eta: f64) -> Result<f64> {
    Ok(complex_log_gamma(nu + Complex64::new(1.0, eta))?.im)
}

/// Sum of the asymptotic series Σ c_k ρ^{−k} and its ρ-derivative,
/// truncated at the smallest term.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticSum {
    pub sum: Complex64,
    pub dsum: Complex64,
    pub terms: usize,
    /// Size of the first omitted term relative to the largest partial sum.
    pub truncation: f64,
}

/// Fails with [`Error::Precision`] when even the optimally truncated series
/// cannot reach `tol` at this ρ.
pub fn asymptotic_sum(nu: Complex64, eta: f64, rho: f64, tol: f64) -> Result<AsymptoticSum> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain(format!("Coulomb argument rho = {rho} must be positive")));
    }
    let i = Complex64::i();
    let ieta = Complex64::new(0.0, eta);
    let inv_rho = 1.0 / rho;

    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut dsum = Complex64::new(0.0, 0.0);
    let mut scale = 1.0_f64;
    let mut terms = 1;
    // Terms may grow while k is below |ν| + |η|; after that the first
    // increase marks the optimal truncation point.
    let growth_region = nu.norm() + eta.abs() + 1.0;
    let mut truncation = f64::INFINITY;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (kf - nu + ieta) * (kf + nu + 1.0 + ieta) / (2.0 * i * (kf + 1.0)) * inv_rho;
        let next = term * ratio;
        let size = next.norm();
        if size == 0.0 {
            truncation = 0.0;
            break;
        }
        if kf > growth_region && size >= term.norm() {
            truncation = term.norm() / scale;
            break;
        }
        if size <= f64::EPSILON * 1e-3 * sum.norm() {
            truncation = size / scale;
            break;
        }
        term = next;
        sum += term;
        // d/dρ of c_{k+1} ρ^{−(k+1)}
        dsum -= term * ((kf + 1.0) * inv_rho);
        scale = scale.max(sum.norm());
        terms += 1;
    }
    if !truncation.is_finite() {
        return Err(Error::NonConvergence(format!(
            "Coulomb series at rho = {rho} did not reach its smallest term"
        )));
    }
    if truncation > tol {
        return Err(Error::Precision { rho, term: truncation, tol });
    }
    Ok(AsymptoticSum { sum, dsum, terms, truncation })
}

/// Evaluates H⁺_ν(η, ρ) and its ρ-derivative.
pub fn coulomb_h_plus(nu: Complex64, eta: f64, rho: f64, tol: f64) -> Result<CoulombValue> {
    let s = asymptotic_sum(nu, eta, rho, tol)?;
    let i = Complex64::i();
    let sigma = coulomb_phase(nu, eta)?;
    let theta = rho - eta * (2.0 * rho).ln() - nu * (PI / 2.0) + sigma;
    let phase = (i * theta).exp();
    let dtheta = 1.0 - eta / rho;
    Ok(CoulombValue {
        h: phase * s.sum,
        dh: phase * (i * dtheta * s.sum + s.dsum),
        terms: s.terms,
        truncation: s.truncation,
    })
}
