use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

// B_2k / (2k (2k − 1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT_MODULUS: f64 = 15.0;

/// log Γ(z) on the principal branch: analytic off the non-positive real axis
/// and real for real z > 0. The imaginary part is the phase of Γ(z),
/// *not* reduced modulo 2π.
///
/// The argument is shifted upward with the recurrence until Stirling's series
/// converges to double precision.
pub fn complex_log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite(format!("in log-gamma argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(z.re));
    }
    if z.re < -1e6 {
        return Err(Error::domain(format!("log-gamma argument {z} too far left")));
    }

    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 0.5 || w.norm() < SHIFT_MODULUS {
        shift += w.ln();
        w += 1.0;
    }

    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift)
}

/// Phase of Γ(z), i.e. the imaginary part of [`complex_log_gamma`].
pub fn gamma_phase(z: Complex64) -> Result<f64> {
    Ok(complex_log_gamma(z)?.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_values() {
        assert!(complex_log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(complex_log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-15);
        let half = complex_log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert_eq!(half.im, 0.0);
        // ln Γ(10) = ln 362880
        let ten = complex_log_gamma(c(10.0, 0.0)).unwrap();
        assert!((ten.re - 362_880f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn recurrence_and_reflection_identities() {
        for z in [c(1.0, 1.0), c(0.3, -2.5), c(-2.7, 0.4), c(4.0, 30.0), c(0.5, 1e-3)] {
            let lg = complex_log_gamma(z).unwrap();
            let lg1 = complex_log_gamma(z + 1.0).unwrap();
            // Γ(z+1) = zΓ(z), branch-exact away from the negative axis.
            let diff = lg1 - lg - z.ln();
            let wrapped = Complex64::new(diff.re, (diff.im / (2.0 * PI)).round() * 2.0 * PI - diff.im);
            assert!(diff.re.abs() < 1e-12 && wrapped.im.abs() < 1e-12, "{z}: {diff}");

            // Γ(z)Γ(1−z) = π / sin(πz)
            let lr = complex_log_gamma(1.0 - z).unwrap();
            let lhs = (lg + lr).exp();
            let rhs = PI / (z * PI).sin();
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm(), "{z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn one_plus_i_reference() {
        // scipy.special.loggamma(1+1j)
        let v = complex_log_gamma(c(1.0, 1.0)).unwrap();
        assert!((v.re - (-0.650_923_199_301_859_2)).abs() < 1e-12, "{v}");
        assert!((v.im - (-0.301_640_320_467_532_86)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn conjugate_symmetry() {
        let z = c(2.3, 0.7);
        let a = complex_log_gamma(z).unwrap();
        let b = complex_log_gamma(z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
    }

    #[test]
    fn large_imaginary_part_is_continuous() {
        // The phase keeps growing like y ln y rather than wrapping.
        let a = gamma_phase(c(1.0, 50.0)).unwrap();
        let b = gamma_phase(c(1.0, 50.001)).unwrap();
        assert!((b - a).abs() < 0.01);
        assert!(a > 100.0);
    }

    #[test]
    fn poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(complex_log_gamma(c(x, 0.0)), Err(Error::Pole(_))));
        }
        assert!(complex_log_gamma(c(-1.0, 1e-9)).is_ok());
    }
}
