use proptest::prelude::*;
use sgqei::geometry::Worldline;
use sgqei::propagators::Regulators;
use sgqei::qei::{h0_integral, k0, kh_majorant, kv_majorant, BoundOptions};
use sgqei::series::mc::extrapolation_weights;
use sgqei::series::{identity_sums, random_configuration, vanishing_sum, ModelParams, TimeWeight};
use sgqei::smearing::{AdiabaticCutoff, CompactTruncation, SmearingFunction};
use sgqei::states::StateW;
use std::f64::consts::PI;

fn params(g0: f64, beta_sq: f64) -> ModelParams {
    ModelParams::new(beta_sq, AdiabaticCutoff::gaussian(g0, 2.0, 2.0)).unwrap()
}

fn thermal() -> StateW {
    StateW::thermal_window(0.5, 2.0, 1.0).unwrap()
}

fn few(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(few(24))]

    #[test]
    fn k0_translation_covariant(a in 0.1f64..2.0, sigma in 0.5f64..2.0, c in -3.0f64..3.0) {
        let wl = Worldline::accelerated(a).unwrap();
        let f = SmearingFunction::gaussian(sigma);
        let (s0, a0) = k0(&wl, &f).unwrap();
        let (s1, a1) = k0(&wl, &f.centered(c)).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-9 * s0);
        prop_assert!((a0 - a1).abs() <= 1e-9 * a0);
    }

    #[test]
    fn k0_quadratic_in_amplitude(eta in -2.0f64..2.0, amp in 0.1f64..5.0) {
        let wl = Worldline::boosted(eta);
        let f = SmearingFunction::bump(1.3);
        let (s, a) = k0(&wl, &f).unwrap();
        let (s2, a2) = k0(&wl, &f.scaled(amp)).unwrap();
        prop_assert!((s2 - amp * amp * s).abs() <= 1e-10 * s2.abs().max(1e-300));
        prop_assert_eq!(a, 0.0);
        prop_assert_eq!(a2, 0.0);
    }

    #[test]
    fn identity_sums_hold(n in 0usize..=64) {
        prop_assert!(identity_sums(n).unwrap().holds());
    }

    #[test]
    fn first_order_vanishing_sum(i in 0u64..10_000, thermal_state in any::<bool>(), beta_sq in 0.5f64..12.0) {
        let s = if thermal_state { thermal() } else { StateW::Vacuum };
        let (xs, ys) = random_configuration(3, 1, i);
        let r = Regulators::new(1e-3, 1.0).unwrap();
        let v = vanishing_sum(1, &xs, &ys, &r, &params(1.0, beta_sq), &s, false).unwrap();
        prop_assert!(v.value.norm() <= 1e-12, "{:?}", v);
    }

    #[test]
    fn extrapolation_cancels_leading_powers(e0 in 1e-3f64..0.1, p in 0.2f64..0.9) {
        let ladder = [e0, e0 / 2.0, e0 / 4.0];
        let w = extrapolation_weights(&ladder, &[p, 1.0]).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for q in [p, 1.0] {
            let s: f64 = w.iter().zip(&ladder).map(|(w, e)| w * e.powf(q)).sum();
            prop_assert!(s.abs() < 1e-9 * e0.powf(q));
        }
    }
}

proptest! {
    #![proptest_config(few(6))]

    #[test]
    fn bounds_are_state_independent(eta in 0.0f64..1.5, g0 in 0.002f64..0.02) {
        let (p, wl) = (params(g0, PI), Worldline::boosted(eta));
        let w = TimeWeight::Squared(SmearingFunction::gaussian(1.0));
        let o = BoundOptions::default();
        let kv = (kv_majorant(&p, &wl, &w, 3, &StateW::Vacuum, &o).unwrap(), kv_majorant(&p, &wl, &w, 3, &thermal(), &o).unwrap());
        let kh = (kh_majorant(&p, &wl, &w, 2, &StateW::Vacuum, &o).unwrap(), kh_majorant(&p, &wl, &w, 2, &thermal(), &o).unwrap());
        prop_assert_eq!(kv.0.value, kv.1.value);
        prop_assert_eq!(kh.0.value, kh.1.value);
    }

    #[test]
    fn kh_grows_with_rapidity(eta in 0.0f64..1.5, d in 0.1f64..1.0) {
        let p = params(0.01, PI);
        let w = TimeWeight::Squared(SmearingFunction::gaussian(1.0));
        let o = BoundOptions::default();
        let a = kh_majorant(&p, &Worldline::boosted(eta), &w, 2, &StateW::Vacuum, &o).unwrap().value;
        let b = kh_majorant(&p, &Worldline::boosted(eta + d), &w, 2, &StateW::Vacuum, &o).unwrap().value;
        prop_assert!(b >= a * (1.0 - 1e-9), "{} < {}", b, a);
    }

    #[test]
    fn kv_monotone_in_weight_mass(amp in 0.2f64..3.0, k in 1.05f64..3.0) {
        let p = params(0.01, PI);
        let wl = Worldline::static_line();
        let o = BoundOptions::default();
        let f = SmearingFunction::gaussian(1.0).scaled(amp);
        let a = kv_majorant(&p, &wl, &TimeWeight::Squared(f), 3, &StateW::Vacuum, &o).unwrap().value;
        let b = kv_majorant(&p, &wl, &TimeWeight::Squared(f.scaled(k)), 3, &StateW::Vacuum, &o).unwrap().value;
        prop_assert!(b > a);
    }

    #[test]
    fn bounds_vanish_with_coupling(g0 in 0.001f64..0.02) {
        let wl = Worldline::accelerated(0.5).unwrap();
        let w = TimeWeight::Squared(SmearingFunction::gaussian(1.0));
        let o = BoundOptions::default();
        let kv = |g| kv_majorant(&params(g, PI), &wl, &w, 3, &StateW::Vacuum, &o).unwrap().value;
        let kh = |g| kh_majorant(&params(g, PI), &wl, &w, 2, &StateW::Vacuum, &o).unwrap().value;
        prop_assert!(kv(g0 / 2.0) < 0.5 * kv(g0));
        prop_assert!(kh(g0 / 2.0) < 0.5 * kh(g0));
    }

    #[test]
    fn truncated_h0_approaches_straight_part(sigma in 0.6f64..1.5) {
        let f = SmearingFunction::gaussian(sigma);
        let (straight, _) = k0(&Worldline::static_line(), &f).unwrap();
        let gaps: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&n| (-h0_integral(&CompactTruncation::new(f, n * sigma).unwrap(), 1e-7).unwrap().parseval - straight).abs())
            .collect();
        prop_assert!(gaps[1] <= gaps[0] && gaps[2] <= gaps[1].max(1e-12 * straight));
        prop_assert!(gaps[2] <= 1e-8 * straight, "{:?}", gaps);
    }
}
