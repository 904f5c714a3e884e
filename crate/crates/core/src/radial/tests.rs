use super::*;

#[test]
fn order_branches() {
    let nu = coulomb_order(0, 1.0);
    assert!((nu - Complex64::new(-0.5, 11f64.sqrt() / 2.0)).norm() < 1e-15);
    let nu = coulomb_order(3, 0.0);
    assert!((nu - Complex64::new(3.0, 0.0)).norm() < 1e-15);
    for (l, w) in [(0, 0.2), (4, 1.7), (2, 3.0)] {
        let nu = coulomb_order(l, w);
        let target = f64::from(l * (l + 1)) - 3.0 * w * w;
        assert!((nu * (nu + 1.0) - target).norm() < 1e-12);
    }
}

#[test]
fn phase_shift_is_real_for_real_order() {
    let c = CoulombAsymptotic::new(2, 0.3).unwrap();
    assert!(c.theta.im.abs() < 1e-15);
    assert_eq!(c.eta, -0.3);
}

#[test]
fn turning_point_brackets_potential() {
    let tp = outer_turning_point(3, 0.2).unwrap();
    assert!((potential(3, tp) - 0.04).abs() < 1e-10);
    assert!(tp > 2.0);
    assert!(outer_turning_point(0, 1.0).is_none());
}

#[test]
fn far_data_is_asymptotically_outgoing() {
    let (l, omega) = (2, 0.5);
    let r = 1e6;
    let d = far_up_data(l, omega, r, 1e-12).unwrap();
    let rstar = crate::spacetime::tortoise(r).unwrap();
    let plane = Complex64::new(0.0, omega * rstar).exp();
    assert!((d.psi - plane).norm() < 1e-5);
    assert!((d.dpsi - Complex64::new(0.0, omega) * plane).norm() < 1e-5);
}

#[test]
fn far_data_residual_decays_as_inverse_cube() {
    // ψ'' in r* against the exact potential; the Coulomb form is only exact
    // to O(1/r³).
    let (l, omega) = (1, 0.5);
    let residual = |r: f64| {
        let h = 1e-3;
        let f = metric_factor(r);
        let p = far_up_data(l, omega, r + h, 1e-13).unwrap().dpsi;
        let m = far_up_data(l, omega, r - h, 1e-13).unwrap().dpsi;
        let d2 = (p - m) / (2.0 * h) * f;
        let c = far_up_data(l, omega, r, 1e-13).unwrap();
        (d2 + (omega * omega - potential(l, r)) * c.psi).norm()
    };
    let a = residual(50.0);
    let b = residual(100.0);
    assert!(a < 1e-4, "{a:e}");
    let ratio = a / b;
    assert!(ratio > 6.0 && ratio < 10.0, "ratio {ratio}");
}

#[test]
fn unitarity_and_reciprocity() {
    for l in 0..=2 {
        for omega in [0.05, 0.5, 1.5] {
            let s = solve_modes(l, omega, 3.0).unwrap();
            assert!(s.unitarity_defect_in() < 1e-6, "{s:?}");
            assert!(s.unitarity_defect_up() < 1e-6, "{s:?}");
            assert!(s.reciprocity_defect() < 1e-6, "{s:?}");
            assert!(s.wronskian_drift < 1e-8, "{s:?}");
        }
    }
}

#[test]
fn low_frequency_s_wave_transmission() {
    let omega = 0.01;
    let s = solve_modes(0, omega, 3.0).unwrap();
    let t = s.b_in.norm_sqr();
    assert!((t / (4.0 * omega * omega) - 1.0).abs() < 0.05, "{t:e}");
}

#[test]
fn centrifugal_suppression() {
    let s = solve_modes(5, 0.1, 3.0).unwrap();
    assert!(s.b_in.norm_sqr() < 1e-10, "{:e}", s.b_in.norm_sqr());
}

#[test]
fn continuity_in_frequency() {
    let a = amplitude_sq(0, 0.5, 3.0).unwrap();
    let b = amplitude_sq(0, 0.5 * (1.0 + 1e-3), 3.0).unwrap();
    assert!((a.0 - b.0).abs() < 1e-2 * a.0);
    assert!((a.1 - b.1).abs() < 1e-2 * a.1);
}

#[test]
fn detector_inside_matching_radius() {
    // Both routes to the detector value must agree.
    let cfg = SolverConfig::default();
    let inner = solve_modes_with(1, 0.4, 1.3, &cfg).unwrap();
    let moved = SolverConfig { r_near: 1.25, ..cfg };
    let outer = solve_modes_with(1, 0.4, 1.3, &moved).unwrap();
    assert!((inner.r_in - outer.r_in).norm() < 1e-8 * inner.r_in.norm());
    assert!((inner.r_up - outer.r_up).norm() < 1e-8 * inner.r_up.norm());
}

#[test]
fn far_detector_envelope() {
    // For large r the in-mode is 1·e^{−iωr*} + A e^{iωr*}, divided by r.
    let r = 400.0;
    let s = solve_modes(0, 0.05, r).unwrap();
    let rstar = crate::spacetime::tortoise(r).unwrap();
    let w = Complex64::new(0.0, 0.05 * rstar).exp();
    let expect = (w.conj() + s.a_in * w) / r;
    assert!((s.r_in - expect).norm() < 1e-3 * expect.norm().max(1e-3 / r));
}

#[test]
fn series_route_matches_direct_integration() {
    // Pure incoming data at r = 1 + 1e-8 integrated out to 1.5 reproduces the
    // horizon series there.
    let (l, omega) = (1, 0.3);
    let r0 = 1.0 + 1e-8;
    let rstar = crate::spacetime::tortoise(r0).unwrap();
    let e = Complex64::new(0.0, -omega * rstar).exp();
    let init = RadialData::new(e, Complex64::new(0.0, -omega) * e);
    let cfg = OdeConfig { rtol: 1e-12, atol: 1e-14, ..OdeConfig::default() };
    let out = integrate_radial(l, omega, r0, 1.5, init, cfg).unwrap();
    let series = jaffe_coefficients(l, omega, 1.5, 1e-15).unwrap().eval(1.5).unwrap();
    assert!((out.data.psi - series.psi).norm() < 1e-6 * series.psi.norm());
    let w = series.conj().wronskian(series);
    let wi = out.data.conj().wronskian(out.data);
    assert!(((w - wi) / w).norm() < 1e-8);
}

#[test]
fn rejects_bad_arguments() {
    assert!(solve_modes(0, 0.0, 3.0).is_err());
    assert!(solve_modes(0, 0.5, 1.0).is_err());
}
