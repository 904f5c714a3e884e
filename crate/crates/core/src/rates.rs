//! Transition rates for sudden switching: the stationary black-hole rate and
//! the time-dependent geon rate, whose second piece is a principal-value
//! integral with its pole at the gap.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{clip_breaks, integrate_panels, refine_breaks, QuadConfig};
use rayon::prelude::*;

use crate::response::{infrared_closure, SweepKind, VacuumKind};
use crate::spacetime::{DetectorWorldline, LocalFrequency};
use crate::table::{ModeTable, TableSource};

/// Gaps used to extrapolate the rate to Ω = 0.
pub const ZERO_GAP_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    pub quad: QuadConfig,
    /// Upper bound on the half-width of the symmetric window around the
    /// pole (detector frame); the window is also at most half the gap.
    pub pv_window: f64,
    /// Allowed change of the principal value when the window is halved,
    /// relative to the size of the δ-term envelope.
    pub pv_tol: f64,
    pub ir_closure: bool,
    /// Largest |τ₀| accepted by the oscillatory quadrature.
    pub tau0_limit: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            pv_window: 0.1,
            pv_tol: 1e-6,
            ir_closure: true,
            tau0_limit: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvValue {
    pub value: f64,
    pub error: f64,
    /// Change in the value when the window is halved.
    pub residual: f64,
}

/// PV ∫_lo^hi g(x)/(x − pole) dx.
///
/// The window [pole − w, pole + w] is folded onto itself,
/// ∫₀^w [g(pole + t) − g(pole − t)]/t dt, which has a bounded integrand;
/// outside it the integral is regular. `breaks` marks points where g is not
/// smooth and `period` optionally caps the panel length.
pub fn pv_integral(
    g: &dyn Fn(f64) -> f64,
    pole: f64,
    lo: f64,
    hi: f64,
    window: f64,
    breaks: &[f64],
    period: Option<f64>,
    quad: &QuadConfig,
) -> Result<PvValue> {
    let with_window = |w: f64| -> Result<(f64, f64)> {
        let (a, b) = (pole - w, pole + w);
        if !(w > 0.0 && a > lo && b < hi) {
            return Err(Error::WindowOverlap { lo: a, hi: b, min: lo, max: hi });
        }
        let refine = |v: Vec<f64>| match period {
            Some(p) => refine_breaks(&v, p),
            None => v,
        };
        let h = |x: f64| g(x) / (x - pole);
        let left = integrate_panels(h, &refine(clip_breaks(breaks, lo, a)), quad)?;
        let right = integrate_panels(h, &refine(clip_breaks(breaks, b, hi)), quad)?;
        let mut inner_breaks: Vec<f64> = breaks
            .iter()
            .map(|&x| (x - pole).abs())
            .filter(|&t| t > 0.0 && t < w)
            .collect();
        inner_breaks.sort_by(f64::total_cmp);
        inner_breaks.dedup();
        let fold = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                (g(pole + t) - g(pole - t)) / t
            }
        };
        let mut fb = vec![0.0];
        fb.extend(inner_breaks);
        fb.push(w);
        let inner = integrate_panels(fold, &refine(fb), quad)?;
        Ok((
            left.value + right.value + inner.value,
            left.error + right.error + inner.error,
        ))
    };
    let (value, error) = with_window(window)?;
    let (half, _) = with_window(0.5 * window)?;
    Ok(PvValue { value, error, residual: (value - half).abs() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub vacuum: VacuumKind,
    /// Detector gap Ω.
    pub gap: f64,
    /// Ω̃ = Ω√f, the Killing frequency of the resonant modes.
    pub gap_mode: f64,
    pub r: f64,
    pub tau0: f64,
    pub rate_bh: f64,
    pub rate_j_delta: f64,
    pub rate_j_pv: f64,
    pub rate_j_total: f64,
    /// Pole location ω̃ = |Ω| and the window-halving residual of the PV term.
    pub pv_pole: f64,
    pub pv_residual: f64,
    /// Set when the Ω = 0 value was obtained by extrapolation.
    pub extrapolated: bool,
}

fn sign(l: u32) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// e^{−2πx}/(x sinh 2πx), written to stay finite for large |x|.
fn thermal_factor(x: f64) -> f64 {
    let a = 2.0 * PI * x;
    if x > 0.0 {
        2.0 * (-2.0 * a).exp() / (x * -(-2.0 * a).exp_m1())
    } else {
        // e^{2π|x|}/(|x| sinh 2π|x|) = 2/(|x|(1 − e^{−4π|x|}))
        2.0 / (-x * -(2.0 * a).exp_m1())
    }
}

fn amplitudes(table: &ModeTable, l: u32, omega: f64, vacuum: VacuumKind) -> Result<(f64, f64)> {
    let (a, b) = table.interpolate(l, omega)?;
    Ok(match vacuum {
        VacuumKind::HartleHawking => (a, b),
        _ => (0.0, b),
    })
}

/// Stationary black-hole rate Ḟ_BH at gap Ω ≠ 0.
pub fn rate_bh(gap: LocalFrequency, vacuum: VacuumKind, table: &ModeTable) -> Result<f64> {
    let det = DetectorWorldline::new(table.r_det())?;
    let gap_mode = det.to_killing(gap).value();
    if gap_mode == 0.0 || !gap_mode.is_finite() {
        return Err(Error::domain("the rate formula needs a non-zero, finite gap"));
    }
    let x = gap_mode.abs();
    let mut total = 0.0;
    for l in 0..=table.l_max() {
        let (r_in, r_up) = table.interpolate(l, x)?;
        let deg = f64::from(2 * l + 1);
        let thermal = deg * thermal_factor(gap_mode) / (16.0 * PI);
        let cold = if gap_mode < 0.0 { deg / (8.0 * PI * x) } else { 0.0 };
        total += match vacuum {
            VacuumKind::HartleHawking => thermal * (r_in + r_up),
            VacuumKind::Unruh => cold * r_in + thermal * r_up,
            VacuumKind::Boulware => cold * (r_in + r_up),
        };
    }
    Ok(total)
}

/// δ-term of the geon rate, without the cos(2τ₀Ω) factor.
fn delta_envelope(gap_mode: f64, vacuum: VacuumKind, table: &ModeTable) -> Result<f64> {
    let x = gap_mode.abs();
    let mut total = 0.0;
    for l in 0..=table.l_max() {
        let (r_in, r_up) = amplitudes(table, l, x, vacuum)?;
        total += sign(l) * f64::from(2 * l + 1) * (r_in + r_up);
    }
    // 1/(Ω̃ sinh 2πΩ̃) is even in Ω̃.
    Ok(total / (16.0 * PI * x * (2.0 * PI * x).sinh()))
}

/// Σ_l (−1)^l (2l+1)(|R_in|² + |R_up|²)/(16πω sinh 2πω); NaN off the table.
fn geon_weight(table: &ModeTable, vacuum: VacuumKind, w: f64) -> f64 {
    let mut modes = 0.0;
    for l in 0..=table.l_max() {
        match amplitudes(table, l, w, vacuum) {
            Ok((r_in, r_up)) => modes += sign(l) * f64::from(2 * l + 1) * (r_in + r_up),
            Err(_) => return f64::NAN,
        }
    }
    modes / (16.0 * PI * w * (2.0 * PI * w).sinh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeonRate {
    pub delta: f64,
    pub pv: f64,
    pub residual: f64,
}

/// Geon rate Ḟ_J(τ₀) = δ-term + principal-value term, at gap Ω ≠ 0.
pub fn rate_j(
    gap: LocalFrequency,
    tau0: f64,
    vacuum: VacuumKind,
    table: &ModeTable,
    cfg: &RateConfig,
) -> Result<GeonRate> {
    if vacuum == VacuumKind::Boulware {
        return Err(Error::Vacuum("Boulware"));
    }
    if tau0.abs() > cfg.tau0_limit {
        return Err(Error::OscillationBudget { tau0, limit: cfg.tau0_limit });
    }
    let det = DetectorWorldline::new(table.r_det())?;
    let sqrt_f = det.redshift();
    let gap_local = gap.value();
    let gap_mode = det.to_killing(gap).value();
    if gap_mode == 0.0 || !gap_mode.is_finite() {
        return Err(Error::domain("the rate formula needs a non-zero, finite gap"));
    }
    let envelope = delta_envelope(gap_mode, vacuum, table)?;
    let delta = envelope * (2.0 * tau0 * gap_local).cos();
    if tau0 == 0.0 {
        return Ok(GeonRate { delta, pv: 0.0, residual: 0.0 });
    }

    // In Killing frequency, dω̃/(ω̃ − |Ω|) = dω/(ω − |Ω̃|), so only the
    // regular factor 2ω̃/(ω̃ + |Ω|) joins the weight in G.
    let a = gap_mode.abs();
    let g = |w: f64| -> f64 {
        let wl = w / sqrt_f;
        geon_weight(table, vacuum, w) * (2.0 * tau0 * wl).sin() / PI * 2.0 * wl / (wl + gap_local.abs())
    };
    let lo = table.grid().omega_min;
    let hi = table.grid().omega_max;
    let window = cfg.pv_window.min(0.5 * gap_local.abs()) * sqrt_f;
    let period = Some(PI * sqrt_f / tau0.abs());
    let pv = pv_integral(&g, a, lo, hi, window, table.frequencies(), period, &cfg.quad)?;
    let mut value = pv.value;
    if cfg.ir_closure {
        let h = |w: f64| g(w) / (w - a);
        value += infrared_closure(lo, &h).0;
    }
    let scale = envelope.abs().max(value.abs());
    if pv.residual > cfg.pv_tol * scale {
        return Err(Error::PvConvergence { residual: pv.residual, tol: cfg.pv_tol * scale });
    }
    Ok(GeonRate { delta, pv: value, residual: pv.residual })
}

/// Geon rate at Ω = 0. The δ-term envelope is extrapolated from
/// [`ZERO_GAP_LADDER`]; the second term has no pole there and is integrated
/// directly.
pub fn rate_j_zero_gap(tau0: f64, vacuum: VacuumKind, table: &ModeTable, cfg: &RateConfig) -> Result<GeonRate> {
    if vacuum == VacuumKind::Boulware {
        return Err(Error::Vacuum("Boulware"));
    }
    if tau0.abs() > cfg.tau0_limit {
        return Err(Error::OscillationBudget { tau0, limit: cfg.tau0_limit });
    }
    let det = DetectorWorldline::new(table.r_det())?;
    let sqrt_f = det.redshift();
    let envelopes = ZERO_GAP_LADDER
        .iter()
        .map(|&g| delta_envelope(det.to_killing(LocalFrequency(g)).value(), vacuum, table))
        .collect::<Result<Vec<_>>>()?;
    let delta = richardson(&envelopes);
    if tau0 == 0.0 {
        return Ok(GeonRate { delta, pv: 0.0, residual: 0.0 });
    }
    let h = |w: f64| geon_weight(table, vacuum, w) * 2.0 * (2.0 * tau0 * w / sqrt_f).sin() / (PI * w);
    let lo = table.grid().omega_min;
    let hi = table.grid().omega_max;
    let breaks = refine_breaks(&clip_breaks(table.frequencies(), lo, hi), PI * sqrt_f / tau0.abs());
    let q = integrate_panels(h, &breaks, &cfg.quad)?;
    let mut pv = q.value;
    if cfg.ir_closure {
        pv += infrared_closure(lo, &h).0;
    }
    if !pv.is_finite() {
        return Err(Error::NonFinite("in the zero-gap geon rate".into()));
    }
    Ok(GeonRate { delta, pv, residual: 0.0 })
}

/// Both rates at one point. At Ω = 0 the black-hole rate and the δ-term
/// envelope are extrapolated from [`ZERO_GAP_LADDER`].
pub fn rate(
    gap: LocalFrequency,
    tau0: f64,
    vacuum: VacuumKind,
    table: &ModeTable,
    cfg: &RateConfig,
) -> Result<RateResult> {
    let det = DetectorWorldline::new(table.r_det())?;
    let geon_vacuum = if vacuum == VacuumKind::Boulware { None } else { Some(vacuum) };
    let eval = |g: f64| -> Result<(f64, GeonRate)> {
        let bh = rate_bh(LocalFrequency(g), vacuum, table)?;
        let j = match geon_vacuum {
            Some(v) => rate_j(LocalFrequency(g), tau0, v, table, cfg)?,
            None => GeonRate { delta: 0.0, pv: 0.0, residual: 0.0 },
        };
        Ok((bh, j))
    };
    let (bh, j, extrapolated) = if gap.value() == 0.0 {
        let bh = ZERO_GAP_LADDER
            .iter()
            .map(|&g| rate_bh(LocalFrequency(g), vacuum, table))
            .collect::<Result<Vec<_>>>()?;
        let j = match geon_vacuum {
            Some(v) => rate_j_zero_gap(tau0, v, table, cfg)?,
            None => GeonRate { delta: 0.0, pv: 0.0, residual: 0.0 },
        };
        (richardson(&bh), j, true)
    } else {
        let (bh, j) = eval(gap.value())?;
        (bh, j, false)
    };
    Ok(RateResult {
        vacuum,
        gap: gap.value(),
        gap_mode: det.to_killing(gap).value(),
        r: table.r_det(),
        tau0,
        rate_bh: bh,
        rate_j_delta: j.delta,
        rate_j_pv: j.pv,
        rate_j_total: j.delta + j.pv,
        pv_pole: gap.value().abs(),
        pv_residual: j.residual,
        extrapolated,
    })
}

/// Parameters of one rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub gap: f64,
    pub r: f64,
    pub tau0: f64,
    pub vacuum: VacuumKind,
}

impl Default for RatePoint {
    fn default() -> Self {
        Self { gap: 0.0, r: 3.0, tau0: 0.0, vacuum: VacuumKind::HartleHawking }
    }
}

impl RatePoint {
    pub fn with(mut self, kind: SweepKind, value: f64) -> Result<Self> {
        match kind {
            SweepKind::Gap => self.gap = value,
            SweepKind::Radius => self.r = value,
            SweepKind::Tau0 => self.tau0 = value,
            SweepKind::Sigma => return Err(Error::domain("the rates do not depend on the switching width")),
        }
        Ok(self)
    }
}

pub fn evaluate_rate(point: &RatePoint, tables: &dyn TableSource, cfg: &RateConfig) -> Result<RateResult> {
    let table = tables.table(point.r)?;
    rate(LocalFrequency(point.gap), point.tau0, point.vacuum, &table, cfg)
}

/// Evaluates the rates along one parameter, in input order.
pub fn sweep_rates(
    kind: SweepKind,
    values: &[f64],
    base: &RatePoint,
    tables: &dyn TableSource,
    cfg: &RateConfig,
) -> Vec<Result<RateResult>> {
    let one = |&v: &f64| base.with(kind, v).and_then(|p| evaluate_rate(&p, tables, cfg));
    if kind == SweepKind::Radius {
        return values.iter().map(one).collect();
    }
    values.par_iter().map(one).collect()
}

/// Extrapolates values at h, h/2, h/4 to h → 0 assuming a power series in h.
pub fn richardson(v: &[f64]) -> f64 {
    let b1 = 2.0 * v[1] - v[0];
    let b2 = 2.0 * v[2] - v[1];
    (4.0 * b2 - b1) / 3.0
}
