//! Adaptive Gauss-Kronrod quadrature over panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel: (value, error estimate).
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (value, err, _) = kronrod_panel(f, a, b);
    (value, err)
}

/// (value, error estimate, rounding floor of the estimate)
fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = kronrod.abs();
    let mut values = [0.0; 15];
    values[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        values[j] = f1;
        values[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((values[j] - mean).abs() + (values[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    let abs = abs * half.abs();
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs;
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (value, err, floor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_panels: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over the panels delimited by `breaks`
/// (sorted ascending). The panel with the largest error is bisected until
/// the summed error meets the tolerance, or until it is dominated by the
/// rounding floor of the panel sums.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<Quadrature> {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut floor = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (v, e, r) = kronrod_panel(&mut f, a, b);
        value += v;
        error += e;
        floor += r;
        heap.push(Panel { a, b, value: v, error: e, floor: r });
    }
    let target = |value: f64, floor: f64| cfg.abs_tol.max(cfg.rel_tol * value.abs()).max(2.0 * floor);
    // Resummed periodically to shed accumulated rounding in the running sums.
    let mut since_resum = 0;
    while error > target(value, floor) {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonFinite("in quadrature".into()));
        }
        if heap.len() >= cfg.max_panels {
            return Err(Error::Tolerance { value, error });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot split further; accept what we have.
            heap.push(worst);
            return Err(Error::Tolerance { value, error });
        }
        let (v1, e1, r1) = kronrod_panel(&mut f, worst.a, mid);
        let (v2, e2, r2) = kronrod_panel(&mut f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        floor += r1 + r2 - worst.floor;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, floor: r1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, floor: r2 });
        since_resum += 1;
        if since_resum == 64 {
            since_resum = 0;
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
            floor = heap.iter().map(|p| p.floor).sum();
        }
    }
    // Sum in a fixed order so results do not depend on heap layout.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Quadrature { value, error, panels: panels.len() })
}

/// Subdivides each interval of `breaks` into pieces no longer than `max_len`.
pub fn refine_breaks(breaks: &[f64], max_len: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len());
    if let Some(&first) = breaks.first() {
        out.push(first);
    }
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / max_len).ceil().max(1.0) as usize;
        for k in 1..n {
            out.push(a + (b - a) * k as f64 / n as f64);
        }
        out.push(b);
    }
    out
}

/// Breakpoints restricted to [lo, hi], with both ends included.
pub fn clip_breaks(nodes: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    out.extend(nodes.iter().copied().filter(|&x| x > lo && x < hi));
    out.push(hi);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_degree_22() {
        for deg in [0, 5, 13, 22] {
            let (v, _) = gauss_kronrod(&mut |x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / f64::from(deg + 1);
            assert!((v - exact).abs() < 1e-15, "degree {deg}: {v}");
        }
    }

    #[test]
    fn gauss_rule_is_exact_for_degree_13() {
        // The error estimate collapses when both rules are exact.
        let (_, e) = gauss_kronrod(&mut |x: f64| 1.0 + x.powi(13), -1.0, 2.0);
        assert!(e < 1e-10, "{e}");
        let (_, e) = gauss_kronrod(&mut |x: f64| x.powi(16), -1.0, 1.0);
        assert!(e > 1e-10);
    }

    #[test]
    fn weights_sum() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let q = integrate_panels(|x: f64| x.sqrt().recip(), &[0.0, 1.0], &QuadConfig::default()).unwrap();
        assert!((q.value - 2.0).abs() < 1e-9, "{q:?}");
    }

    #[test]
    fn oscillatory_panels() {
        let t = 200.0;
        let breaks = refine_breaks(&[0.0, 3.0], std::f64::consts::PI / t);
        let q = integrate_panels(|x: f64| (t * x).cos() * (-x).exp(), &breaks, &QuadConfig::default()).unwrap();
        // ∫₀³ e^{−x} cos(tx) dx
        let a = (-3.0f64).exp();
        let exact = (1.0 - a * (3.0 * t).cos() + t * a * (3.0 * t).sin()) / (1.0 + t * t);
        assert!((q.value - exact).abs() < 1e-12, "{} vs {exact}", q.value);
    }

    #[test]
    fn budget_exhaustion_reports_error() {
        let cfg = QuadConfig { rel_tol: 1e-14, abs_tol: 0.0, max_panels: 3 };
        let err = integrate_panels(|x: f64| (1.0 / x).sin(), &[1e-3, 1.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::Tolerance { .. }));
    }

    #[test]
    fn breaks_helpers() {
        let b = refine_breaks(&[0.0, 1.0, 1.5], 0.3);
        assert_eq!(b.len(), 7);
        assert!(b.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.3 + 1e-15));
        let c = clip_breaks(&[0.1, 0.2, 0.3, 0.4], 0.15, 0.35);
        assert_eq!(c, vec![0.15, 0.2, 0.3, 0.35]);
    }
}
