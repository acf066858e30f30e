use std::time::Instant;

use qsl_core::alpha::{alpha_newton, Fidelity};
use qsl_core::oracle::{grid_alpha_oracle, verify_bound, OracleConfig, SampleOutcome};
use qsl_core::RootConfig;

#[test]
fn default_run_has_no_violations() {
    let start = Instant::now();
    let rep = verify_bound(&OracleConfig::default()).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(
        rep.violations, 0,
        "min relative margin {}",
        rep.min_relative_margin
    );
    assert!(rep.strengthened_dominates);
    assert!(rep.checked > 200, "only {} checked", rep.checked);
    assert!(rep.min_relative_margin >= -1e-9);
    // Some samples have an empty lowest level, where the strengthened bound is strictly larger.
    assert!(rep
        .records
        .iter()
        .any(|r| r.outcome == SampleOutcome::Ok && r.bound_strengthened > r.bound));
    eprintln!(
        "checked {} skipped {} min margin {:.3e} in {:.2?}",
        rep.checked, rep.skipped, rep.min_relative_margin, elapsed
    );
}

#[test]
fn reports_are_reproducible() {
    let cfg = OracleConfig {
        samples: 20,
        ..OracleConfig::default()
    };
    let a = serde_json::to_string(&verify_bound(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_bound(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = OracleConfig { seed: 43, ..cfg };
    let c = serde_json::to_string(&verify_bound(&other).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn grid_oracle_agrees_with_newton() {
    let cfg = RootConfig::default();
    for i in 1..=19 {
        let eps = Fidelity::new(i as f64 / 20.0).unwrap();
        let grid = grid_alpha_oracle(eps, 10_000_000).unwrap();
        let newton = alpha_newton(eps, &cfg).unwrap().alpha;
        assert!(
            (grid - newton).abs() < 1e-6,
            "eps {}: {grid} vs {newton}",
            eps.value()
        );
        assert!(grid >= newton - 1e-15);
    }
}
