//! Invariants over randomised inputs.

use std::sync::OnceLock;

use geon_core::response::{response_bh, response_j, ResponseConfig};
use geon_core::{response, SwitchingProfile};
use geon_core::spacetime::local_temperature;
use geon_core::{build_table, rate_bh, solve_modes, FrequencyGrid, LocalFrequency, ModeTable, VacuumKind};
use proptest::prelude::*;

fn table() -> &'static ModeTable {
    static T: OnceLock<ModeTable> = OnceLock::new();
    T.get_or_init(|| build_table(3.0, 2, FrequencyGrid::new(1e-3, 3.0, 80).unwrap()).unwrap())
}

fn vacuum() -> impl Strategy<Value = VacuumKind> {
    prop_oneof![Just(VacuumKind::HartleHawking), Just(VacuumKind::Unruh)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scattering_conserves_flux(l in 0u32..8, lw in -4.0f64..0.5, r in 1.1f64..30.0) {
        let s = solve_modes(l, 10f64.powf(lw), r).unwrap();
        prop_assert!(s.unitarity_defect() < 1e-6);
        prop_assert!(s.reciprocity_defect() < 1e-6);
        prop_assert!(s.r_in.is_finite() && s.r_up.is_finite());
    }

    #[test]
    fn black_hole_response_is_positive(gap in -0.2f64..0.2, sigma in 5.0f64..200.0, v in vacuum()) {
        let (f, _) = response_bh(LocalFrequency(gap), sigma, v, table(), &ResponseConfig::default()).unwrap();
        prop_assert!(f > 0.0);
    }

    #[test]
    fn total_response_is_non_negative(
        gap in -0.1f64..0.1,
        sigma in 5.0f64..200.0,
        shift in -10.0f64..10.0,
        v in vacuum(),
    ) {
        let p = SwitchingProfile::new(sigma, shift * sigma).unwrap();
        let r = response(LocalFrequency(gap), p, v, table(), &ResponseConfig::default()).unwrap();
        prop_assert!(r.f_total >= 0.0, "{r:?}");
    }

    #[test]
    fn geon_term_follows_the_gap_law(x in 0.0f64..2.5, sigma in 10.0f64..200.0, v in vacuum()) {
        let cfg = ResponseConfig::default();
        let (f0, _) = response_j(LocalFrequency(0.0), sigma, v, table(), &cfg).unwrap();
        let (f, _) = response_j(LocalFrequency(x / sigma), sigma, v, table(), &cfg).unwrap();
        prop_assert!((f / f0 - (-x * x).exp()).abs() < 1e-8 * (-x * x).exp());
    }

    #[test]
    fn thermal_rate_satisfies_detailed_balance(x in 0.05f64..4.0) {
        let gap = x * local_temperature(3.0).unwrap();
        let up = rate_bh(LocalFrequency(gap), VacuumKind::HartleHawking, table()).unwrap();
        let down = rate_bh(LocalFrequency(-gap), VacuumKind::HartleHawking, table()).unwrap();
        prop_assert!((up / down - (-x).exp()).abs() < 1e-10 * (-x).exp());
    }

    #[test]
    fn interpolated_amplitudes_are_probabilities(l in 0u32..=2, lw in -3.0f64..0.47) {
        let (a, b) = table().interpolate(l, 10f64.powf(lw)).unwrap();
        prop_assert!(a >= 0.0 && b >= 0.0);
    }
}
