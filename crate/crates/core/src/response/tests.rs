use std::sync::OnceLock;

use super::*;
use crate::table::{build_table, FrequencyGrid};

fn table() -> &'static ModeTable {
    static T: OnceLock<ModeTable> = OnceLock::new();
    T.get_or_init(|| build_table(3.0, 2, FrequencyGrid::new(1e-3, 3.0, 80).unwrap()).unwrap())
}

fn cfg() -> ResponseConfig {
    ResponseConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn geon_gap_dependence_is_gaussian() {
    let sigma = 100.0;
    let hh = VacuumKind::HartleHawking;
    let (f0, _) = response_j(LocalFrequency(0.0), sigma, hh, table(), &cfg()).unwrap();
    for x in [0.5, 1.0, 2.0] {
        let gap = x / sigma;
        let (f, _) = response_j(LocalFrequency(gap), sigma, hh, table(), &cfg()).unwrap();
        assert!(rel(f / f0, (-x * x).exp()) < 1e-8, "σΩ = {x}");
        let (fm, _) = response_j(LocalFrequency(-gap), sigma, hh, table(), &cfg()).unwrap();
        assert!(rel(fm, f) < 1e-12);
    }
}

#[test]
fn untranslated_profile_matches_plain_geon_term() {
    let hh = VacuumKind::HartleHawking;
    let a = response_j(LocalFrequency(0.01), 50.0, hh, table(), &cfg()).unwrap();
    let p = SwitchingProfile::new(50.0, 0.0).unwrap();
    let b = response_j_translated(LocalFrequency(0.01), p, hh, table(), &cfg()).unwrap();
    assert_eq!(a.0, b.0);
}

#[test]
fn translation_is_even_and_leaves_black_hole_part_alone() {
    let hh = VacuumKind::HartleHawking;
    let gap = LocalFrequency(0.005);
    let plus = response(gap, SwitchingProfile::new(50.0, 30.0).unwrap(), hh, table(), &cfg()).unwrap();
    let minus = response(gap, SwitchingProfile::new(50.0, -30.0).unwrap(), hh, table(), &cfg()).unwrap();
    let still = response(gap, SwitchingProfile::new(50.0, 0.0).unwrap(), hh, table(), &cfg()).unwrap();
    assert!(rel(plus.f_j, minus.f_j) < 1e-9);
    assert_eq!(plus.f_bh, still.f_bh);
    assert!(plus.f_j.abs() < still.f_j.abs());
}

#[test]
fn unruh_keeps_only_the_thermal_up_family() {
    let p = SwitchingProfile::new(100.0, 0.0).unwrap();
    let gap = LocalFrequency(0.0);
    let hh = response(gap, p, VacuumKind::HartleHawking, table(), &cfg()).unwrap();
    let u = response(gap, p, VacuumKind::Unruh, table(), &cfg()).unwrap();
    for (a, b) in hh.partials.iter().zip(&u.partials) {
        assert_eq!(a.bh_up, b.bh_up);
        assert_eq!(a.j_up, b.j_up);
        assert_eq!(b.j_in, 0.0);
        assert!(b.bh_in < a.bh_in);
    }
    let up_sum: f64 = hh.partials.iter().map(|p| p.j_up).sum();
    assert!(rel(u.f_j, up_sum) < 1e-14);
}

#[test]
fn odd_multipoles_enter_the_geon_term_with_negative_sign() {
    let p = SwitchingProfile::new(100.0, 0.0).unwrap();
    let r = response(LocalFrequency(0.0), p, VacuumKind::HartleHawking, table(), &cfg()).unwrap();
    let l1 = &r.partials[1];
    assert!(l1.j_in + l1.j_up < 0.0);
    assert!(l1.bh_in + l1.bh_up > 0.0);
    assert!(r.partials[0].j_in > 0.0);
}

#[test]
fn excitation_dies_off_for_large_gap() {
    let hh = VacuumKind::HartleHawking;
    let (f0, _) = response_bh(LocalFrequency(0.0), 100.0, hh, table(), &cfg()).unwrap();
    let (f2, _) = response_bh(LocalFrequency(2.0), 100.0, hh, table(), &cfg()).unwrap();
    let (fm, _) = response_bh(LocalFrequency(-0.5), 100.0, hh, table(), &cfg()).unwrap();
    assert!(f2 >= 0.0 && f2 < 1e-8 * f0, "{f2:e} vs {f0:e}");
    // De-excitation stays allowed.
    assert!(fm > f0);
}

#[test]
fn boulware_has_no_response_formula() {
    let p = SwitchingProfile::new(100.0, 0.0).unwrap();
    let e = response(LocalFrequency(0.0), p, VacuumKind::Boulware, table(), &cfg()).unwrap_err();
    assert!(matches!(e, Error::Vacuum(_)));
}

#[test]
fn long_translation_is_refused() {
    let p = SwitchingProfile::new(10.0, 500.0).unwrap();
    let e = response(LocalFrequency(0.0), p, VacuumKind::HartleHawking, table(), &cfg()).unwrap_err();
    assert!(matches!(e, Error::OscillationBudget { .. }));
}

#[test]
fn bad_profiles_are_rejected() {
    assert!(SwitchingProfile::new(0.0, 0.0).is_err());
    assert!(SwitchingProfile::new(-1.0, 0.0).is_err());
    assert!(SwitchingProfile::new(1.0, f64::NAN).is_err());
}

#[test]
fn profile_transform_is_gaussian() {
    let p = SwitchingProfile::new(2.0, 0.0).unwrap();
    let v = p.fourier(LocalFrequency(0.5));
    assert!((v.re - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    assert_eq!(v.im, 0.0);
}

#[test]
fn closure_is_exact_for_power_laws() {
    let (v, e) = infrared_closure(1e-3, &|w: f64| 3.0 * w * w);
    assert!(rel(v, 1e-9) < 1e-12);
    assert!(e < 1e-20);
    let (v, _) = infrared_closure(1e-3, &|w: f64| 0.0 * w);
    assert_eq!(v, 0.0);
}

#[test]
fn labels_round_trip() {
    for v in [VacuumKind::HartleHawking, VacuumKind::Unruh, VacuumKind::Boulware] {
        assert_eq!(v.label().parse::<VacuumKind>().unwrap(), v);
    }
    for k in [SweepKind::Gap, SweepKind::Radius, SweepKind::Sigma, SweepKind::Tau0] {
        assert_eq!(k.label().parse::<SweepKind>().unwrap(), k);
    }
    assert!("vacuum".parse::<VacuumKind>().is_err());
    assert!("mass".parse::<SweepKind>().is_err());
}

#[test]
fn sweep_keeps_input_order_and_isolates_failures() {
    let source = std::sync::Arc::new(table().clone());
    let base = ResponsePoint::default();
    let out = sweep(SweepKind::Sigma, &[100.0, -1.0, 50.0], &base, &source, &cfg());
    assert_eq!(out.len(), 3);
    assert_eq!(out[0].as_ref().unwrap().sigma, 100.0);
    assert!(out[1].is_err());
    assert_eq!(out[2].as_ref().unwrap().sigma, 50.0);
    let wrong_radius = sweep(SweepKind::Radius, &[4.0], &base, &source, &cfg());
    assert!(wrong_radius[0].is_err());
}
