use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Frequency where the spacing switches from logarithmic to uniform.
pub const SPLIT: f64 = 0.1;

/// Killing-frequency grid: logarithmic below [`SPLIT`], uniform above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub nodes: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::with_cutoff(1e-4, 400)
    }
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, nodes: usize) -> Result<Self> {
        let g = Self { omega_min, omega_max, nodes };
        g.validate()?;
        Ok(g)
    }

    /// Grid from `omega_min` up to the default upper frequency.
    pub fn with_cutoff(omega_min: f64, nodes: usize) -> Self {
        Self { omega_min, omega_max: default_upper_frequency(omega_min), nodes }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min >= 1e-6 && self.omega_min.is_finite()) {
            return Err(Error::domain(format!("grid lower frequency {} below 1e-6", self.omega_min)));
        }
        if !(self.omega_max > self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::domain(format!(
                "grid upper frequency {} must exceed {}",
                self.omega_max, self.omega_min
            )));
        }
        if self.nodes < 4 {
            return Err(Error::domain(format!("grid needs at least 4 nodes, got {}", self.nodes)));
        }
        Ok(())
    }

    /// Same range with twice the node density.
    pub fn refined(&self) -> Self {
        Self { nodes: 2 * self.nodes, ..*self }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let (lo, hi, n) = (self.omega_min, self.omega_max, self.nodes);
        if hi <= SPLIT || lo >= SPLIT {
            let (s0, s1) = (coordinate(lo), coordinate(hi));
            return (0..n)
                .map(|k| inverse_coordinate(s0 + (s1 - s0) * k as f64 / (n - 1) as f64))
                .map(|w| w.clamp(lo, hi))
                .collect();
        }
        let n_log = n / 2;
        let n_lin = n - n_log;
        let (l0, l1) = (lo.ln(), SPLIT.ln());
        let mut out: Vec<f64> = (0..n_log)
            .map(|k| (l0 + (l1 - l0) * k as f64 / n_log as f64).exp())
            .collect();
        out[0] = lo;
        out.extend((0..n_lin).map(|k| SPLIT + (hi - SPLIT) * k as f64 / (n_lin - 1) as f64));
        *out.last_mut().expect("non-empty") = hi;
        out
    }
}

/// Interpolation coordinate: ln ω below the split, linear above, joined with
/// matching slope.
pub fn coordinate(omega: f64) -> f64 {
    if omega <= SPLIT {
        omega.ln()
    } else {
        SPLIT.ln() + (omega - SPLIT) / SPLIT
    }
}

pub fn inverse_coordinate(s: f64) -> f64 {
    let split = SPLIT.ln();
    if s <= split {
        s.exp()
    } else {
        SPLIT + (s - split) * SPLIT
    }
}

/// Frequency where 1/(ω sinh 2πω) has fallen to 1e−16 of its value at
/// `omega_min`. This is the envelope over all switching widths σ of
/// σe^{−σ²ω̃²}/sinh 2πω, since max_σ σe^{−σ²ω̃²} ∝ 1/ω̃.
pub fn default_upper_frequency(omega_min: f64) -> f64 {
    let weight = |w: f64| -(w.ln()) - (2.0 * PI * w).sinh().ln();
    let target = weight(omega_min) + 1e-16f64.ln();
    let (mut lo, mut hi) = (omega_min, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if weight(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Round up to a tidy value.
    (hi * 100.0).ceil() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = FrequencyGrid::default();
        let w = g.frequencies();
        assert_eq!(w.len(), 400);
        assert_eq!(w[0], 1e-4);
        assert_eq!(*w.last().unwrap(), g.omega_max);
        assert!(w.windows(2).all(|p| p[1] > p[0]));
        assert!(w.contains(&SPLIT));
        assert!(g.omega_max > 3.0 && g.omega_max < 3.5, "{}", g.omega_max);
    }

    #[test]
    fn upper_frequency_meets_weight_bound() {
        let lo = 1e-4;
        let hi = default_upper_frequency(lo);
        let weight = |w: f64| 1.0 / (w * (2.0 * PI * w).sinh());
        assert!(weight(hi) < 1e-16 * weight(lo));
        assert!(weight(hi - 0.05) > 1e-16 * weight(lo));
    }

    #[test]
    fn coordinate_round_trip() {
        for w in [1e-5, 0.05, 0.1, 0.3, 3.0] {
            assert!((inverse_coordinate(coordinate(w)) - w).abs() < 1e-15 * w.max(1.0));
        }
    }

    #[test]
    fn refined_grid_doubles_density() {
        let g = FrequencyGrid::new(1e-3, 2.0, 20).unwrap();
        let fine = g.refined().frequencies();
        assert_eq!(fine.len(), 40);
        assert_eq!(fine[0], 1e-3);
        assert_eq!(*fine.last().unwrap(), 2.0);
    }

    #[test]
    fn validation() {
        assert!(FrequencyGrid::new(1e-7, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(1e-3, 1e-3, 10).is_err());
        assert!(FrequencyGrid::new(1e-3, 1.0, 3).is_err());
        let single = FrequencyGrid::new(1e-3, 0.05, 8).unwrap().frequencies();
        assert!(single.windows(2).all(|p| p[1] > p[0]));
    }
}
