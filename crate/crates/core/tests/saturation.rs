use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qsl_core::alpha::{alpha_newton, relative_difference, Fidelity};
use qsl_core::saturate::{
    default_resolution, fidelity_two_level, first_passage_time, ml_bound, saturating_state,
    FiniteSystem, Level,
};
use qsl_core::RootConfig;

fn eps_grid() -> Vec<Fidelity> {
    (0..50)
        .map(|i| Fidelity::new(0.999 * i as f64 / 49.0).unwrap())
        .collect()
}

#[test]
fn constructed_states_attain_the_bound() {
    let cfg = RootConfig::default();
    for eps in eps_grid() {
        let s = saturating_state(eps, &cfg).unwrap();
        assert!(s.invariants_hold(), "{s:?}");
        let sys = s.to_system();
        let t_max = 2.0 * PI;
        let tau = first_passage_time(&sys, eps, t_max, default_resolution(&sys, t_max))
            .unwrap()
            .expect("reaches target");
        let bound = ml_bound(&sys, eps, false).unwrap();
        assert!(
            relative_difference(tau, bound) <= 1e-8,
            "eps {}: {tau} vs {bound}",
            eps.value()
        );
        assert!(relative_difference(tau, s.gap_time) <= 1e-9);
    }
}

#[test]
fn overlap_phase_is_theta_opt() {
    let cfg = RootConfig::default();
    for eps in eps_grid().into_iter().skip(1) {
        let s = saturating_state(eps, &cfg).unwrap();
        let arg = s.to_system().overlap(s.gap_time).arg();
        assert!(
            (arg - s.theta_opt).abs() < 1e-9,
            "eps {}: {arg} vs {}",
            eps.value(),
            s.theta_opt
        );
    }
}

#[test]
fn populations_closed_and_tan_forms_agree() {
    let cfg = RootConfig::default();
    let mut compared = 0;
    for eps in eps_grid() {
        let s = saturating_state(eps, &cfg).unwrap();
        if let Some(t) = s.a1_sq_tan_form() {
            assert!(
                (t - s.a1_sq).abs() < 1e-9,
                "eps {}: {t} vs {}",
                eps.value(),
                s.a1_sq
            );
            compared += 1;
        }
        let round = fidelity_two_level(s.a1_sq, s.gap_time).unwrap().value();
        assert!((round - eps.value()).abs() < 1e-10);
        assert!(relative_difference(s.alpha, alpha_newton(eps, &cfg).unwrap().alpha) < 1e-9);
    }
    assert!(compared > 40);
}

fn system_strategy() -> impl Strategy<Value = FiniteSystem> {
    prop::collection::vec((0.0..3.0f64, 0.0..1.0f64, 0.0..TAU), 2..6).prop_map(|raw| {
        let total: f64 = raw.iter().map(|r| r.1).sum::<f64>().max(1e-300);
        let levels = raw
            .iter()
            .map(|&(e, w, p)| {
                Level::new(
                    e,
                    if total > 1e-300 {
                        w / total
                    } else {
                        1.0 / raw.len() as f64
                    },
                    p,
                )
            })
            .collect();
        FiniteSystem { levels }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn strengthened_dominates(sys in system_strategy(), e in 0.0..1.0f64) {
        prop_assume!(sys.validate().is_ok());
        let eps = Fidelity::new(e).unwrap();
        let std = ml_bound(&sys, eps, false).unwrap();
        let strong = ml_bound(&sys, eps, true).unwrap();
        prop_assert!(strong >= std);
    }

    #[test]
    fn two_level_fidelity_in_range(a in 0.0..=1.0f64, t in 0.0..100.0f64) {
        let f = fidelity_two_level(a, t).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(f >= (1.0 - 2.0 * a).powi(2) - 1e-15);
    }
}
