//! Truncation and switching-time convergence at the default parameters.

use std::sync::OnceLock;

use geon_core::rates::{rate_j, rate_j_zero_gap};
use geon_core::response::ResponseConfig;
use geon_core::{build_table, response, RateConfig, FrequencyGrid, LocalFrequency, ModeTable, SwitchingProfile, VacuumKind};

fn table(l_max: u32) -> &'static ModeTable {
    static T10: OnceLock<ModeTable> = OnceLock::new();
    static T14: OnceLock<ModeTable> = OnceLock::new();
    let cell = if l_max == 10 { &T10 } else { &T14 };
    cell.get_or_init(|| build_table(3.0, l_max, FrequencyGrid::default()).unwrap())
}

fn at(t: &ModeTable, vacuum: VacuumKind, tau0: f64) -> geon_core::ResponseResult {
    let p = SwitchingProfile::new(100.0, tau0).unwrap();
    response(LocalFrequency(0.0), p, vacuum, t, &ResponseConfig::default()).unwrap()
}

#[test]
fn highest_multipole_is_negligible() {
    let r = at(table(10), VacuumKind::HartleHawking, 0.0);
    let l0 = r.partials[0].j_in + r.partials[0].j_up;
    let l10 = r.partials[10].j_in + r.partials[10].j_up;
    assert!(l10.abs() < 1e-8 * l0.abs(), "{l10:e} vs {l0:e}");
}

#[test]
fn more_multipoles_do_not_move_the_response() {
    for vacuum in [VacuumKind::HartleHawking, VacuumKind::Unruh] {
        let a = at(table(10), vacuum, 0.0);
        let b = at(table(14), vacuum, 0.0);
        for (x, y) in [(a.f_bh, b.f_bh), (a.f_j, b.f_j), (a.f_total, b.f_total)] {
            assert!((x - y).abs() < 1e-6 * x.abs(), "{vacuum}: {x} vs {y}");
        }
    }
}

#[test]
fn late_switching_suppresses_the_geon_term() {
    let t = table(10);
    let still = at(t, VacuumKind::HartleHawking, 0.0);
    let late = at(t, VacuumKind::HartleHawking, 1000.0);
    assert!(late.f_j.abs() < 0.05 * still.f_j, "{} vs {}", late.f_j, still.f_j);
    assert_eq!(late.f_bh, still.f_bh);
}

#[test]
fn zero_gap_rate_joins_the_small_gap_rates() {
    let t = table(10);
    let cfg = RateConfig::default();
    let hh = VacuumKind::HartleHawking;
    for tau0 in [-100.0, -5.0, 40.0, 100.0] {
        let z = rate_j_zero_gap(tau0, hh, t, &cfg).unwrap();
        let near = rate_j(LocalFrequency(3e-4), tau0, hh, t, &cfg).unwrap();
        let scale = z.delta.abs();
        assert!((z.delta - near.delta).abs() < 1e-2 * scale, "τ₀ = {tau0}");
        assert!((z.pv - near.pv).abs() < 1e-2 * scale, "τ₀ = {tau0}");
    }
}
