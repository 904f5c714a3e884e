//! Response of a Gaussian-switched detector: the black-hole part F_BH and the
//! geon image part F_J, for the Hartle-Hawking and Unruh states.
//!
//! Integrals run over the Killing frequency ω of the modes; the switching
//! function and the gap are in the detector frame, ω̃ = ω/√f.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{clip_breaks, integrate_panels, refine_breaks, QuadConfig};
use crate::spacetime::{DetectorWorldline, KillingFrequency, LocalFrequency};
use crate::table::{ModeTable, TableSource};

/// Gaussian weights below e^{−745} underflow, so integrals stop this many
/// widths past the gap.
const GAUSSIAN_REACH: f64 = 27.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VacuumKind {
    HartleHawking,
    Unruh,
    Boulware,
}

impl VacuumKind {
    pub fn label(self) -> &'static str {
        match self {
            VacuumKind::HartleHawking => "HH",
            VacuumKind::Unruh => "Unruh",
            VacuumKind::Boulware => "Boulware",
        }
    }
}

impl fmt::Display for VacuumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VacuumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hh" | "hartle-hawking" | "hartlehawking" => Ok(VacuumKind::HartleHawking),
            "unruh" | "u" => Ok(VacuumKind::Unruh),
            "boulware" | "b" => Ok(VacuumKind::Boulware),
            _ => Err(Error::domain(format!("unknown vacuum '{s}' (expected hh, unruh or boulware)"))),
        }
    }
}

/// χ(τ) = exp(−(τ − τ₀)²/2σ²) in proper time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingProfile {
    pub sigma: f64,
    pub tau0: f64,
}

impl SwitchingProfile {
    pub fn new(sigma: f64, tau0: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("switching width {sigma} must be positive")));
        }
        if !tau0.is_finite() {
            return Err(Error::domain("switching centre must be finite"));
        }
        Ok(Self { sigma, tau0 })
    }

    /// χ̂(ω̃) = (2π)^{−1/2} ∫ e^{−iω̃τ} χ(τ) dτ = σ e^{−σ²ω̃²/2} e^{−iω̃τ₀}.
    pub fn fourier(&self, omega: LocalFrequency) -> Complex64 {
        let w = omega.value();
        let s = self.sigma;
        Complex64::from_polar(s * (-0.5 * s * s * w * w).exp(), -w * self.tau0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseConfig {
    pub quad: QuadConfig,
    /// Add the power-law extrapolation of each integrand below the table's
    /// lowest frequency.
    pub ir_closure: bool,
    /// Largest |τ₀|/σ accepted by the oscillatory quadrature.
    pub tau0_budget: f64,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self { quad: QuadConfig::default(), ir_closure: true, tau0_budget: 10.0 }
    }
}

/// Contributions of one angular momentum, split by mode family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PartialTerm {
    pub l: u32,
    pub bh_in: f64,
    pub bh_up: f64,
    pub j_in: f64,
    pub j_up: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseResult {
    pub vacuum: VacuumKind,
    /// Detector gap Ω (proper frame).
    pub gap: f64,
    pub r: f64,
    pub sigma: f64,
    pub tau0: f64,
    pub f_bh: f64,
    pub f_j: f64,
    pub f_total: f64,
    pub err_bh: f64,
    pub err_j: f64,
    pub partials: Vec<PartialTerm>,
}

impl ResponseResult {
    pub fn err_est(&self) -> f64 {
        self.err_bh + self.err_j
    }
}

/// Integral of one (l, family) term with its error estimate.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Piece {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    In,
    Up,
}

/// ∫ dω̃ weight(ω)·|R_family|² over the table range (in the local measure),
/// plus the infrared closure below the table's first node.
pub(crate) fn mode_integral(
    table: &ModeTable,
    l: u32,
    family: Family,
    upper: f64,
    period: Option<f64>,
    cfg: &ResponseConfig,
    weight: &dyn Fn(f64) -> f64,
) -> Result<Piece> {
    let sqrt_f = DetectorWorldline::new(table.r_det())?.redshift();
    let lo = table.grid().omega_min;
    let hi = upper.min(table.grid().omega_max);
    let amp = |w: f64| -> Result<f64> {
        let (a, b) = table.interpolate(l, w)?;
        Ok(match family {
            Family::In => a,
            Family::Up => b,
        })
    };
    let g = |w: f64| weight(w) * amp(w).unwrap_or(f64::NAN) / sqrt_f;

    let mut piece = Piece::default();
    if hi > lo {
        let mut breaks = clip_breaks(table.frequencies(), lo, hi);
        if let Some(p) = period {
            breaks = refine_breaks(&breaks, p);
        }
        let q = integrate_panels(g, &breaks, &cfg.quad)?;
        piece.value = q.value;
        piece.error = q.error;
    }
    if cfg.ir_closure {
        let (value, error) = infrared_closure(lo, &g);
        piece.value += value;
        piece.error += error;
    }
    if !piece.value.is_finite() {
        return Err(Error::NonFinite(format!("in the l = {l} integrand")));
    }
    Ok(piece)
}

/// ∫₀^c g for g ≈ A ω^p near the origin, with p fitted from g(c) and g(2c).
/// The error is the spread against a fit from g(c) and g(3c/2).
pub(crate) fn infrared_closure(c: f64, g: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let g1 = g(c);
    if g1 == 0.0 || !g1.is_finite() {
        return (0.0, 0.0);
    }
    let closure = |factor: f64| -> Option<f64> {
        let g2 = g(factor * c);
        let ratio = g2 / g1;
        if !(ratio > 0.0) {
            return None;
        }
        let p = ratio.ln() / factor.ln();
        (p > -1.0).then(|| c * g1 / (p + 1.0))
    };
    match (closure(2.0), closure(1.5)) {
        (Some(a), Some(b)) => (a, (a - b).abs()),
        // Sign change or non-integrable fit: fall back to a constant and
        // report the whole piece as uncertain.
        _ => (c * g1, (c * g1).abs()),
    }
}

fn sign(l: u32) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// 1/(1 − e^{−4πω}), finite for ω > 0.
fn bose(omega: f64) -> f64 {
    -1.0 / (-4.0 * PI * omega).exp_m1()
}

struct Setup {
    sqrt_f: f64,
    upper: f64,
}

fn setup(table: &ModeTable, gap: f64, sigma: f64) -> Result<Setup> {
    let det = DetectorWorldline::new(table.r_det())?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("switching width {sigma} must be positive")));
    }
    if !gap.is_finite() {
        return Err(Error::domain("gap must be finite"));
    }
    let sqrt_f = det.redshift();
    let upper_local = gap.abs() + GAUSSIAN_REACH / sigma;
    let upper = det.to_killing(LocalFrequency(upper_local)).value();
    Ok(Setup { sqrt_f, upper })
}

fn check_vacuum(vacuum: VacuumKind) -> Result<()> {
    if vacuum == VacuumKind::Boulware {
        return Err(Error::Vacuum("Boulware"));
    }
    Ok(())
}

/// Black-hole part per angular momentum.
fn bh_terms(
    table: &ModeTable,
    gap: LocalFrequency,
    sigma: f64,
    vacuum: VacuumKind,
    cfg: &ResponseConfig,
) -> Result<Vec<(Piece, Piece)>> {
    check_vacuum(vacuum)?;
    let gap = gap.value();
    let s = setup(table, gap, sigma)?;
    let sqrt_f = s.sqrt_f;
    // cosh(2πω − 2σ²ω̃Ω)/sinh(2πω)·e^{−σ²(ω̃²+Ω²)}, rewritten without overflow.
    let thermal = move |w: f64| {
        let wl = w / sqrt_f;
        let plus = (-sigma * sigma * (wl + gap).powi(2)).exp();
        let minus = (-sigma * sigma * (wl - gap).powi(2) - 4.0 * PI * w).exp();
        sigma / (8.0 * PI * w) * (plus + minus) * bose(w)
    };
    // Without a thermal population only the de-excitation branch survives.
    let cold = move |w: f64| {
        let wl = w / sqrt_f;
        sigma / (8.0 * PI * w) * (-sigma * sigma * (wl + gap).powi(2)).exp()
    };
    (0..=table.l_max())
        .map(|l| {
            let deg = f64::from(2 * l + 1);
            let w_up = |w: f64| deg * thermal(w);
            let up = mode_integral(table, l, Family::Up, s.upper, None, cfg, &w_up)?;
            let inn = match vacuum {
                VacuumKind::HartleHawking => mode_integral(table, l, Family::In, s.upper, None, cfg, &w_up)?,
                _ => {
                    let w_in = |w: f64| deg * cold(w);
                    mode_integral(table, l, Family::In, s.upper, None, cfg, &w_in)?
                }
            };
            Ok((inn, up))
        })
        .collect()
}

/// Geon part per angular momentum, with the translation factor cos(2ω̃τ₀).
fn j_terms(
    table: &ModeTable,
    gap: LocalFrequency,
    profile: SwitchingProfile,
    vacuum: VacuumKind,
    cfg: &ResponseConfig,
) -> Result<Vec<(Piece, Piece)>> {
    check_vacuum(vacuum)?;
    let gap = gap.value();
    let SwitchingProfile { sigma, tau0 } = profile;
    let limit = cfg.tau0_budget * sigma;
    if tau0.abs() > limit {
        return Err(Error::OscillationBudget { tau0, limit });
    }
    let s = setup(table, gap, sigma)?;
    let sqrt_f = s.sqrt_f;
    // One panel per period π/|τ₀| of the cosine, in Killing frequency.
    let period = (tau0 != 0.0).then(|| PI * sqrt_f / tau0.abs());
    let base = move |w: f64| {
        let wl = w / sqrt_f;
        // 1/sinh(2πω) = 2e^{−2πω}/(1 − e^{−4πω})
        let inv_sinh = 2.0 * (-2.0 * PI * w).exp() * bose(w);
        let osc = if tau0 == 0.0 { 1.0 } else { (2.0 * wl * tau0).cos() };
        sigma / (8.0 * PI * w) * inv_sinh * (-sigma * sigma * (wl * wl + gap * gap)).exp() * osc
    };
    (0..=table.l_max())
        .map(|l| {
            let c = sign(l) * f64::from(2 * l + 1);
            let w = |x: f64| c * base(x);
            let up = mode_integral(table, l, Family::Up, s.upper, period, cfg, &w)?;
            let inn = match vacuum {
                VacuumKind::HartleHawking => mode_integral(table, l, Family::In, s.upper, period, cfg, &w)?,
                _ => Piece::default(),
            };
            Ok((inn, up))
        })
        .collect()
}

fn total(terms: &[(Piece, Piece)]) -> (f64, f64) {
    let value = terms.iter().map(|(a, b)| a.value + b.value).sum();
    let error = terms.iter().map(|(a, b)| a.error + b.error).sum();
    (value, error)
}

/// F_BH for gap Ω (detector frame) and switching width σ.
pub fn response_bh(
    gap: LocalFrequency,
    sigma: f64,
    vacuum: VacuumKind,
    table: &ModeTable,
    cfg: &ResponseConfig,
) -> Result<(f64, f64)> {
    Ok(total(&bh_terms(table, gap, sigma, vacuum, cfg)?))
}

/// F_J at τ₀ = 0.
pub fn response_j(
    gap: LocalFrequency,
    sigma: f64,
    vacuum: VacuumKind,
    table: &ModeTable,
    cfg: &ResponseConfig,
) -> Result<(f64, f64)> {
    Ok(total(&j_terms(table, gap, SwitchingProfile::new(sigma, 0.0)?, vacuum, cfg)?))
}

/// F_J for a switching function centred at τ₀.
pub fn response_j_translated(
    gap: LocalFrequency,
    profile: SwitchingProfile,
    vacuum: VacuumKind,
    table: &ModeTable,
    cfg: &ResponseConfig,
) -> Result<(f64, f64)> {
    Ok(total(&j_terms(table, gap, profile, vacuum, cfg)?))
}

/// Both parts, with per-l partial sums.
pub fn response(
    gap: LocalFrequency,
    profile: SwitchingProfile,
    vacuum: VacuumKind,
    table: &ModeTable,
    cfg: &ResponseConfig,
) -> Result<ResponseResult> {
    let bh = bh_terms(table, gap, profile.sigma, vacuum, cfg)?;
    let j = j_terms(table, gap, profile, vacuum, cfg)?;
    let (f_bh, err_bh) = total(&bh);
    let (f_j, err_j) = total(&j);
    let partials = bh
        .iter()
        .zip(&j)
        .enumerate()
        .map(|(l, ((bi, bu), (ji, ju)))| PartialTerm {
            l: l as u32,
            bh_in: bi.value,
            bh_up: bu.value,
            j_in: ji.value,
            j_up: ju.value,
        })
        .collect();
    Ok(ResponseResult {
        vacuum,
        gap: gap.value(),
        r: table.r_det(),
        sigma: profile.sigma,
        tau0: profile.tau0,
        f_bh,
        f_j,
        f_total: f_bh + f_j,
        err_bh,
        err_j,
        partials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Gap,
    Radius,
    Sigma,
    Tau0,
}

impl SweepKind {
    pub fn label(self) -> &'static str {
        match self {
            SweepKind::Gap => "Omega",
            SweepKind::Radius => "r",
            SweepKind::Sigma => "sigma",
            SweepKind::Tau0 => "tau0",
        }
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gap" | "omega" => Ok(SweepKind::Gap),
            "radius" | "r" => Ok(SweepKind::Radius),
            "sigma" => Ok(SweepKind::Sigma),
            "tau0" | "time" => Ok(SweepKind::Tau0),
            _ => Err(Error::domain(format!("unknown sweep variable '{s}'"))),
        }
    }
}

/// Parameters of one response evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub gap: f64,
    pub r: f64,
    pub sigma: f64,
    pub tau0: f64,
    pub vacuum: VacuumKind,
}

impl Default for ResponsePoint {
    fn default() -> Self {
        Self { gap: 0.0, r: 3.0, sigma: 100.0, tau0: 0.0, vacuum: VacuumKind::HartleHawking }
    }
}

impl ResponsePoint {
    pub fn with(mut self, kind: SweepKind, value: f64) -> Self {
        match kind {
            SweepKind::Gap => self.gap = value,
            SweepKind::Radius => self.r = value,
            SweepKind::Sigma => self.sigma = value,
            SweepKind::Tau0 => self.tau0 = value,
        }
        self
    }
}

pub fn evaluate_point(point: &ResponsePoint, tables: &dyn TableSource, cfg: &ResponseConfig) -> Result<ResponseResult> {
    let table = tables.table(point.r)?;
    let profile = SwitchingProfile::new(point.sigma, point.tau0)?;
    response(LocalFrequency(point.gap), profile, point.vacuum, &table, cfg)
}

/// Evaluates the response along one parameter. Results come back in input
/// order; a failing point does not stop the others.
pub fn sweep(
    kind: SweepKind,
    values: &[f64],
    base: &ResponsePoint,
    tables: &dyn TableSource,
    cfg: &ResponseConfig,
) -> Vec<Result<ResponseResult>> {
    if kind == SweepKind::Radius {
        // Each radius needs its own table; build them one at a time so the
        // table build itself can use every core.
        return values
            .iter()
            .map(|&v| evaluate_point(&base.with(kind, v), tables, cfg))
            .collect();
    }
    values
        .par_iter()
        .map(|&v| evaluate_point(&base.with(kind, v), tables, cfg))
        .collect()
}

/// Killing-frame image of a detector-frame frequency, for callers holding a
/// table.
pub fn mode_frequency(table: &ModeTable, omega: LocalFrequency) -> Result<KillingFrequency> {
    Ok(DetectorWorldline::new(table.r_det())?.to_killing(omega))
}

#[cfg(test)]
mod tests;
