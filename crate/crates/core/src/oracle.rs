//! Brute-force checks: random finite-level systems against the speed limit,
//! and a plain grid minimization of `alpha`.
//!
//! Systems are drawn from ChaCha8 seeded with `seed_from_u64(seed)`, which is
//! specified by the `rand_chacha` crate and reproduces across platforms.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{alpha_newton, Fidelity};
use crate::error::{QslError, Result};
use crate::rootfind::RootConfig;
use crate::saturate::{
    default_resolution, first_passage_times, ml_bound_with_alpha, FiniteSystem, Level,
    POPULATION_THRESHOLD,
};

/// Relative slack below the bound tolerated before a sample counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub seed: u64,
    pub samples: usize,
    pub max_levels: usize,
    pub energy_scale: f64,
    pub eps_grid: Vec<Fidelity>,
    /// Time horizon in periods of the largest Bohr frequency:
    /// `t_max = horizon * 2 pi / (E_max - E_min)`.
    pub horizon: f64,
    /// Extra systems checked after the random ones.
    #[serde(default)]
    pub injected: Vec<FiniteSystem>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 200,
            max_levels: 5,
            energy_scale: 1.0,
            eps_grid: (1..=9)
                .map(|i| Fidelity::new(i as f64 / 10.0).unwrap())
                .collect(),
            horizon: 10.0,
            injected: Vec::new(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 && self.injected.is_empty() {
            return Err(QslError::InvalidConfig("samples must be at least 1".into()));
        }
        if self.max_levels < 2 {
            return Err(QslError::InvalidConfig(
                "max_levels must be at least 2".into(),
            ));
        }
        if !(self.energy_scale > 0.0 && self.energy_scale.is_finite()) {
            return Err(QslError::InvalidConfig(format!(
                "energy scale {}",
                self.energy_scale
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(QslError::InvalidConfig(format!("horizon {}", self.horizon)));
        }
        if self.eps_grid.is_empty() {
            return Err(QslError::InvalidConfig("empty fidelity grid".into()));
        }
        for s in &self.injected {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleOutcome {
    Ok,
    Violation,
    /// The fidelity can never get this low.
    Unreachable,
    /// Not reached within the time horizon.
    NotReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: usize,
    pub levels: usize,
    pub epsilon: Fidelity,
    #[serde(with = "crate::sentinel::option")]
    pub tau: Option<f64>,
    #[serde(with = "crate::sentinel")]
    pub bound: f64,
    #[serde(with = "crate::sentinel")]
    pub bound_strengthened: f64,
    /// `tau - bound_strengthened`; the strengthened bound is the larger one.
    #[serde(with = "crate::sentinel::option")]
    pub margin: Option<f64>,
    pub outcome: SampleOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub config: OracleConfig,
    pub systems: Vec<FiniteSystem>,
    pub records: Vec<SampleRecord>,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Smallest `margin / bound_strengthened` over checked records.
    #[serde(with = "crate::sentinel")]
    pub min_relative_margin: f64,
    /// Smallest absolute margin over checked records.
    #[serde(with = "crate::sentinel")]
    pub min_margin: f64,
    /// Whether the strengthened bound was at least the standard one everywhere.
    pub strengthened_dominates: bool,
}

/// Draw `cfg.samples` random systems. Every fourth has an empty lowest level.
pub fn sample_systems(cfg: &OracleConfig) -> Vec<FiniteSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.samples)
        .map(|i| {
            let empty_ground = i % 4 == 3;
            let min_levels = if empty_ground {
                3.min(cfg.max_levels)
            } else {
                2
            };
            let n = rng.gen_range(min_levels..=cfg.max_levels);
            let mut levels: Vec<Level> = (0..n)
                .map(|_| {
                    let energy = rng.gen_range(0.0..=cfg.energy_scale);
                    let weight = -(1.0 - rng.gen::<f64>()).ln();
                    let phase = rng.gen_range(0.0..TAU);
                    Level::new(energy, weight, phase)
                })
                .collect();
            levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            if empty_ground {
                levels[0].population = 0.0;
            }
            let total: f64 = levels.iter().map(|l| l.population).sum();
            for l in &mut levels {
                l.population /= total;
            }
            FiniteSystem { levels }
        })
        .collect()
}

/// Check every system against both bounds on every grid fidelity.
pub fn verify_bound(cfg: &OracleConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let mut systems = sample_systems(cfg);
    systems.extend(cfg.injected.iter().cloned());

    let root_cfg = RootConfig::default();
    let alphas: Vec<f64> = cfg
        .eps_grid
        .iter()
        .map(|&e| alpha_newton(e, &root_cfg).map(|r| r.alpha))
        .collect::<Result<_>>()?;

    let per_system: Vec<Vec<SampleRecord>> = systems
        .par_iter()
        .enumerate()
        .map(|(i, sys)| check_system(i, sys, &cfg.eps_grid, &alphas, cfg.horizon))
        .collect::<Result<_>>()?;
    let records: Vec<SampleRecord> = per_system.into_iter().flatten().collect();

    let mut report = OracleReport {
        config: cfg.clone(),
        systems,
        checked: 0,
        skipped: 0,
        violations: 0,
        min_relative_margin: f64::INFINITY,
        min_margin: f64::INFINITY,
        strengthened_dominates: true,
        records: Vec::new(),
    };
    for r in &records {
        if r.bound_strengthened < r.bound {
            report.strengthened_dominates = false;
        }
        match r.outcome {
            SampleOutcome::Ok | SampleOutcome::Violation => {
                report.checked += 1;
                let m = r.margin.unwrap_or(f64::INFINITY);
                report.min_margin = report.min_margin.min(m);
                if r.bound_strengthened > 0.0 {
                    report.min_relative_margin =
                        report.min_relative_margin.min(m / r.bound_strengthened);
                }
                if r.outcome == SampleOutcome::Violation {
                    report.violations += 1;
                }
            }
            _ => report.skipped += 1,
        }
    }
    report.records = records;
    Ok(report)
}

fn check_system(
    index: usize,
    sys: &FiniteSystem,
    eps_grid: &[Fidelity],
    alphas: &[f64],
    horizon: f64,
) -> Result<Vec<SampleRecord>> {
    let floor = sys.fidelity_floor();
    let spread = sys.energy_spread();
    let reachable: Vec<usize> = (0..eps_grid.len())
        .filter(|&k| eps_grid[k].value() >= floor && spread > 0.0)
        .collect();
    let taus = if reachable.is_empty() {
        Vec::new()
    } else {
        let t_max = horizon * TAU / spread;
        let targets: Vec<Fidelity> = reachable.iter().map(|&k| eps_grid[k]).collect();
        first_passage_times(sys, &targets, t_max, default_resolution(sys, t_max))?
    };

    Ok(eps_grid
        .iter()
        .zip(alphas)
        .enumerate()
        .map(|(k, (&eps, &alpha))| {
            let bound = ml_bound_with_alpha(sys, eps, alpha, false, POPULATION_THRESHOLD);
            let bound_strengthened =
                ml_bound_with_alpha(sys, eps, alpha, true, POPULATION_THRESHOLD);
            let tau = reachable.iter().position(|&r| r == k).and_then(|p| taus[p]);
            let outcome = match tau {
                None if reachable.contains(&k) => SampleOutcome::NotReached,
                None => SampleOutcome::Unreachable,
                Some(t) if t < bound_strengthened * (1.0 - VIOLATION_SLACK) => {
                    SampleOutcome::Violation
                }
                Some(t) if t < bound * (1.0 - VIOLATION_SLACK) => SampleOutcome::Violation,
                Some(_) => SampleOutcome::Ok,
            };
            SampleRecord {
                sample: index,
                levels: sys.levels.len(),
                epsilon: eps,
                tau,
                bound,
                bound_strengthened,
                margin: tau.map(|t| t - bound_strengthened),
                outcome,
            }
        })
        .collect())
}

/// `min_y 2y [1 - sqrt(1 - (1 - eps) csc^2 y)] / pi` over `points` equally
/// spaced `y` in `[asin sqrt(1 - eps), pi/2]`, evaluated literally.
pub fn grid_alpha_oracle(eps: Fidelity, points: usize) -> Result<f64> {
    if points < 1000 {
        return Err(QslError::InvalidConfig(format!(
            "{points} grid points, need at least 1000"
        )));
    }
    let delta = 1.0 - eps.value();
    let lo = delta.sqrt().asin();
    let step = (FRAC_PI_2 - lo) / (points - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..points {
        let y = if i + 1 == points {
            FRAC_PI_2
        } else {
            lo + step * i as f64
        };
        let s = y.sin();
        let v = 2.0 * y / PI * (1.0 - (1.0 - delta / (s * s)).max(0.0).sqrt());
        best = best.min(v);
    }
    Ok(best)
}
