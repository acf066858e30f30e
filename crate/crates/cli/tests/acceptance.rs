//! Acceptance checks. Each prints one PASS/FAIL line; any failure exits non-zero.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::Command;
use std::time::Instant;

use qsl_cli::bench::{default_grid, run_bench};
use qsl_core::alpha::{
    alpha_glm_legacy, alpha_lower, alpha_newton, alpha_upper, relative_difference, Fidelity,
    GlmRoot, Method,
};
use qsl_core::oracle::{verify_bound, OracleConfig};
use qsl_core::saturate::{default_resolution, first_passage_time, ml_bound, saturating_state};
use qsl_core::tangency::{a_theta, dphi_dtheta, phi, Angle};
use qsl_core::{RootConfig, RootStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type CheckFn = fn() -> Check;

fn fid(e: f64) -> Fidelity {
    Fidelity::new(e).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seven_figure_agreement() -> Check {
    let cfg = RootConfig::default();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 1..=99 {
        let eps = fid(i as f64 / 100.0);
        let lo = alpha_lower(eps, &cfg).map_err(|e| e.to_string())?.alpha;
        let up = alpha_upper(eps, &cfg).map_err(|e| e.to_string())?.alpha;
        worst = worst.max(relative_difference(lo, up));
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-7, || format!("max rel diff {worst:.3e} > 1e-7"))?;
    ensure(worst <= 1e-9, || {
        format!("max rel diff {worst:.3e} misses 1e-9 target")
    })?;
    ensure(elapsed.as_secs_f64() < 10.0, || {
        format!("took {elapsed:.2?}")
    })?;
    Ok(format!(
        "max rel diff {worst:.3e} over 99 points in {elapsed:.2?}"
    ))
}

fn endpoints() -> Check {
    let cfg = RootConfig::default();
    let mut worst: f64 = 0.0;
    for (e, want) in [(0.0, 1.0), (1.0, 0.0)] {
        for r in [
            alpha_lower(fid(e), &cfg),
            alpha_upper(fid(e), &cfg),
            alpha_newton(fid(e), &cfg),
        ] {
            let r = r.map_err(|err| err.to_string())?;
            worst = worst.max((r.alpha - want).abs());
        }
    }
    let g =
        alpha_glm_legacy(fid(0.0), GlmRoot::Newton { p: 0.5 }, &cfg).map_err(|e| e.to_string())?;
    worst = worst.max((g.alpha - 1.0).abs());
    ensure(
        alpha_glm_legacy(fid(1.0), GlmRoot::Brent, &cfg).is_err(),
        || "glm accepted eps = 1".into(),
    )?;
    ensure(worst <= 1e-12, || format!("endpoint error {worst:.3e}"))?;
    Ok(format!(
        "max endpoint error {worst:.3e}; glm rejects eps = 1"
    ))
}

fn saturation_suite() -> Check {
    let cfg = RootConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let eps = fid(0.999 * i as f64 / 49.0);
        let s = saturating_state(eps, &cfg).map_err(|e| e.to_string())?;
        let lo = 0.5 * (1.0 - eps.overlap());
        ensure(
            s.a1_sq <= 0.5 && (s.a1_sq > lo || eps.value() == 0.0),
            || {
                format!(
                    "a1_sq {} outside ({lo}, 1/2] at eps {}",
                    s.a1_sq,
                    eps.value()
                )
            },
        )?;
        let sys = s.to_system();
        let t_max = 2.0 * PI;
        let tau = first_passage_time(&sys, eps, t_max, default_resolution(&sys, t_max))
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("eps {} never reached", eps.value()))?;
        let bound = ml_bound(&sys, eps, false).map_err(|e| e.to_string())?;
        worst = worst.max(relative_difference(tau, bound));
    }
    ensure(worst <= 1e-8, || format!("worst relative gap {worst:.3e}"))?;
    let s0 = saturating_state(Fidelity::ZERO, &cfg).map_err(|e| e.to_string())?;
    ensure(
        (s0.a1_sq - 0.5).abs() <= 1e-10 && (s0.gap_time - PI).abs() <= 1e-10,
        || format!("eps 0: a1_sq {} gap_time {}", s0.a1_sq, s0.gap_time),
    )?;
    Ok(format!(
        "50 states, worst first-passage vs bound {worst:.3e}; eps 0 gap_time - pi = {:.1e}",
        s0.gap_time - PI
    ))
}

fn newton_robustness() -> Check {
    let cfg = RootConfig::default();
    let mut max_iter = 0;
    for i in 1..=999 {
        let eps = fid(i as f64 / 1000.0);
        let r = alpha_newton(eps, &cfg).map_err(|e| e.to_string())?;
        ensure(r.status == RootStatus::Converged, || {
            format!("eps {}: {}", eps.value(), r.status)
        })?;
        max_iter = max_iter.max(r.iterations);
    }
    ensure(max_iter <= 50, || format!("{max_iter} iterations"))?;
    Ok(format!(
        "999 points converged, at most {max_iter} iterations"
    ))
}

fn instability_reproduction() -> Check {
    let cfg = RootConfig::default();
    let mut failures = Vec::new();
    for i in 76..100 {
        let e = i as f64 / 100.0;
        let r = alpha_glm_legacy(fid(e), GlmRoot::Newton { p: 0.5 }, &cfg)
            .map_err(|e| e.to_string())?;
        if !r.status.is_converged() {
            failures.push(e);
        }
    }
    ensure(!failures.is_empty(), || {
        "p = 0.5 converged on all of [0.76, 0.99]".into()
    })?;
    let rescued = alpha_glm_legacy(fid(0.76), GlmRoot::Newton { p: 0.99 }, &cfg)
        .map_err(|e| e.to_string())?;
    ensure(rescued.status.is_converged(), || {
        format!("p = 0.99 at 0.76: {}", rescued.status)
    })?;
    Ok(format!(
        "p = 0.5 fails at {}/24 grid points in [0.76, 0.99]; p = 0.99 converges at 0.76",
        failures.len()
    ))
}

fn tangency_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let theta = rng.gen_range(Angle::MIN + 1e-12..Angle::MAX - 1e-12);
        let x = theta + rng.gen_range(0.0..20.0);
        let a = a_theta(Angle::new(theta).unwrap()).map_err(|e| e.to_string())?;
        ensure(x.cos() >= theta.cos() - a * (x - theta) - 1e-12, || {
            format!("theta {theta} x {x}")
        })?;
    }
    let p1 = phi(-1.0).map_err(|e| e.to_string())?;
    ensure((p1 - 2.74).abs() <= 0.01, || format!("phi(-1) = {p1}"))?;

    let n = 500;
    let (lo, hi) = (Angle::MIN + 1e-12, Angle::MAX - 1e-12);
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let phis: Vec<f64> = grid
        .iter()
        .map(|&t| phi(t))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for i in 1..n {
        let (t1, t2, p1, p2) = (grid[i - 1], grid[i], phis[i - 1], phis[i]);
        if t2 < FRAC_PI_2 {
            ensure(p1 >= p2 - 1e-10, || format!("phi increases at {t2}"))?;
        }
        ensure(p1 - t1 >= p2 - t2 - 1e-10, || {
            format!("phi - theta increases at {t2}")
        })?;
        ensure(p1 + t1 <= p2 + t2 + 1e-10, || {
            format!("phi + theta decreases at {t2}")
        })?;
    }

    let mut worst_fd: f64 = 0.0;
    for i in 0..=400 {
        let theta = -PI + 0.01 + (FRAC_PI_2 - 0.01 - (-PI + 0.01)) * i as f64 / 400.0;
        let d = dphi_dtheta(Angle::new(theta).unwrap()).map_err(|e| e.to_string())?;
        ensure((-1.0..=0.0).contains(&d), || {
            format!("dphi/dtheta {d} at {theta}")
        })?;
        let h = 1e-6;
        let fd = (phi(theta + h).unwrap() - phi(theta - h).unwrap()) / (2.0 * h);
        worst_fd = worst_fd.max((d - fd).abs() / d.abs().max(1e-3));
    }
    ensure(worst_fd <= 1e-4, || {
        format!("finite-difference mismatch {worst_fd:.3e}")
    })?;
    Ok(format!(
        "10^4 inequality pairs, phi(-1) = {p1:.6}, 500-point monotonicity, derivative rel err {worst_fd:.1e}"
    ))
}

fn oracle_non_violation() -> Check {
    let start = Instant::now();
    let rep = verify_bound(&OracleConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(rep.violations == 0, || {
        format!("{} violations", rep.violations)
    })?;
    ensure(rep.min_relative_margin >= -1e-9, || {
        format!("margin {:.3e}", rep.min_relative_margin)
    })?;
    ensure(rep.strengthened_dominates, || {
        "strengthened bound below standard".into()
    })?;
    ensure(elapsed.as_secs_f64() < 60.0, || {
        format!("took {elapsed:.2?}")
    })?;
    Ok(format!(
        "{} checks, {} skipped, 0 violations, min relative margin {:.3e}, {elapsed:.2?}",
        rep.checked, rep.skipped, rep.min_relative_margin
    ))
}

fn benchmark_ordering() -> Check {
    let methods = [Method::Lower, Method::Upper, Method::Newton];
    let rep = run_bench(
        &default_grid(),
        &methods,
        5,
        20,
        GlmRoot::Brent,
        &RootConfig::default(),
    );
    let t = |m| rep.summary_for(m).unwrap();
    let (lo, up, nw) = (t(Method::Lower), t(Method::Upper), t(Method::Newton));
    ensure(rep.fastest == Method::Newton, || {
        format!("fastest is {}", rep.fastest)
    })?;
    Ok(format!(
        "median ns: newton {nw:.0}, upper {up:.0}, lower {lo:.0} (lower/newton {:.0}x)",
        lo / nw
    ))
}

fn determinism() -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qsl"))
            .args([
                "verify",
                "--seed",
                "42",
                "--samples",
                "200",
                "--format",
                "json",
            ])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || {
        "verify exited non-zero".into()
    })?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || {
        "outputs differ".into()
    })?;
    Ok(format!("two runs, {} identical bytes", a.stdout.len()))
}

fn main() {
    let checks: [(&str, CheckFn); 9] = [
        (
            "seven-figure agreement of lower and upper",
            seven_figure_agreement,
        ),
        ("endpoints", endpoints),
        ("saturation suite", saturation_suite),
        ("newton robustness", newton_robustness),
        ("legacy instability reproduction", instability_reproduction),
        ("tangency invariants", tangency_invariants),
        ("oracle non-violation", oracle_non_violation),
        ("benchmark ordering", benchmark_ordering),
        ("determinism of verify", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
