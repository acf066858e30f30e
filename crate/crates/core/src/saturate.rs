//! Bound-saturating two-level states, finite-level evolution and the speed
//! limit `tau >= pi alpha(eps) / (2 <E - E_ref>)` in units where `hbar = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alpha::{alpha_newton, lower_optimum, Fidelity};
use crate::error::{QslError, Result};
use crate::rootfind::RootConfig;

/// Populations at or below this are treated as empty when locating the lowest
/// occupied level for the strengthened bound.
pub const POPULATION_THRESHOLD: f64 = 1e-15;

/// Grid points per unit of `(E_max - E_min) t` used by [`default_resolution`].
pub const POINTS_PER_UNIT: f64 = 1e5;

const SUM_TOLERANCE: f64 = 1e-12;
const TIME_TOLERANCE: f64 = 1e-12;
// A grid-local minimum closer than this to the target is refined before
// deciding whether the fidelity touches it.
const TOUCH_WINDOW: f64 = 1e-8;
const TOUCH_TOLERANCE: f64 = 1e-13;
const RECOMPUTE_EVERY: usize = 1024;

/// Two-level state `a0|E0> + a1|E1>` (real nonnegative amplitudes) whose
/// evolution reaches fidelity `eps` exactly at the speed limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturatingState {
    pub epsilon: Fidelity,
    /// Excited-level population `|a1|^2`.
    pub a1_sq: f64,
    pub theta_opt: f64,
    pub phi_opt: f64,
    /// `(E1 - E0) tau`: `phi_opt - theta_opt`.
    pub gap_time: f64,
    /// `alpha(eps)` at the same optimum.
    pub alpha: f64,
}

impl SaturatingState {
    /// Embed with `E0 = 0` and `E1 = 1`, so `tau = gap_time`.
    pub fn to_system(&self) -> FiniteSystem {
        FiniteSystem {
            levels: vec![
                Level::new(0.0, 1.0 - self.a1_sq, 0.0),
                Level::new(1.0, self.a1_sq, 0.0),
            ],
        }
    }

    /// `|a1|^2` from `tan theta / (tan theta (1 - cos g) - sin g)`; `None` when
    /// the denominator is smaller than `1e-6` in magnitude.
    pub fn a1_sq_tan_form(&self) -> Option<f64> {
        let t = self.theta_opt.tan();
        let g = self.gap_time;
        let den = t * (1.0 - g.cos()) - g.sin();
        (den.abs() > 1e-6).then(|| t / den)
    }

    pub fn invariants_hold(&self) -> bool {
        let lo = 0.5 * (1.0 - self.epsilon.overlap());
        // At eps = 0 the admissible interval closes onto the single point 1/2.
        let above_lo = if self.epsilon.value() == 0.0 {
            (self.a1_sq - 0.5).abs() <= 1e-12
        } else {
            self.a1_sq > lo
        };
        above_lo
            && self.a1_sq <= 0.5
            && self.gap_time > 0.0
            && self.theta_opt <= 0.0
            && self.theta_opt >= crate::alpha::theta_min(self.epsilon)
    }
}

/// Build the saturating state for `eps in [0, 1)` from the shared lower
/// optimizer.
pub fn saturating_state(eps: Fidelity, cfg: &RootConfig) -> Result<SaturatingState> {
    if eps.value() == 1.0 {
        return Err(QslError::UnsupportedFidelity(1.0));
    }
    let opt = lower_optimum(eps, cfg)?;
    let theta = opt.theta;
    let phi = opt.tangency.phi;
    let gap = phi - theta;
    let a1_sq =
        (theta.abs().sin() / (2.0 * (0.5 * gap).sin() * (0.5 * (phi + theta)).cos())).min(0.5);
    Ok(SaturatingState {
        epsilon: eps,
        a1_sq,
        theta_opt: theta,
        phi_opt: phi,
        gap_time: gap,
        alpha: 2.0 * opt.value / PI,
    })
}

/// `1 - 4 a (1 - a) sin^2(t / 2)` for a two-level state with `|a1|^2 = a`.
pub fn fidelity_two_level(a1_sq: f64, gap_time: f64) -> Result<Fidelity> {
    if !(0.0..=1.0).contains(&a1_sq) {
        return Err(QslError::InvalidSystem(format!(
            "population {a1_sq} outside [0, 1]"
        )));
    }
    if !(gap_time >= 0.0) {
        return Err(QslError::InvalidSystem(format!(
            "negative gap time {gap_time}"
        )));
    }
    let s = (0.5 * gap_time).sin();
    Fidelity::new((1.0 - 4.0 * a1_sq * (1.0 - a1_sq) * s * s).clamp(0.0, 1.0))
}

/// Energy eigenlevel with population `|a_j|^2` and amplitude phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub population: f64,
    pub phase: f64,
}

impl Level {
    pub fn new(energy: f64, population: f64, phase: f64) -> Self {
        Self {
            energy,
            population,
            phase,
        }
    }
}

/// Pure state over finitely many energy eigenlevels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSystem {
    pub levels: Vec<Level>,
}

impl FiniteSystem {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        let sys = Self { levels };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(QslError::InvalidSystem("no levels".into()));
        }
        for l in &self.levels {
            if !l.energy.is_finite() || !l.phase.is_finite() {
                return Err(QslError::InvalidSystem(format!("non-finite level {l:?}")));
            }
            if !(l.population >= 0.0) {
                return Err(QslError::InvalidSystem(format!(
                    "negative population {}",
                    l.population
                )));
            }
        }
        let total: f64 = self.levels.iter().map(|l| l.population).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(QslError::InvalidSystem(format!(
                "populations sum to {total}"
            )));
        }
        Ok(())
    }

    /// Ground energy of the Hamiltonian, `E0`.
    pub fn ground_energy(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.energy)
            .fold(f64::INFINITY, f64::min)
    }

    /// Lowest energy carrying population above `threshold`.
    pub fn lowest_populated_energy(&self, threshold: f64) -> f64 {
        self.levels
            .iter()
            .filter(|l| l.population > threshold)
            .map(|l| l.energy)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn energy_spread(&self) -> f64 {
        let hi = self
            .levels
            .iter()
            .map(|l| l.energy)
            .fold(f64::NEG_INFINITY, f64::max);
        hi - self.ground_energy()
    }

    /// `<E> - reference`.
    pub fn mean_energy_above(&self, reference: f64) -> f64 {
        self.levels
            .iter()
            .map(|l| l.population * (l.energy - reference))
            .sum()
    }

    pub fn max_population(&self) -> f64 {
        self.levels.iter().map(|l| l.population).fold(0.0, f64::max)
    }

    /// `<psi(0)|psi(t)> = sum_j |a_j|^2 exp(-i (E_j - E0) t)`.
    pub fn overlap(&self, t: f64) -> Complex64 {
        let e0 = self.ground_energy();
        self.levels
            .iter()
            .map(|l| Complex64::from_polar(l.population, -(l.energy - e0) * t))
            .sum()
    }

    pub fn fidelity(&self, t: f64) -> f64 {
        self.overlap(t).norm_sqr()
    }

    /// `d/dt |<psi(0)|psi(t)>|^2`.
    pub fn fidelity_derivative(&self, t: f64) -> f64 {
        let e0 = self.ground_energy();
        let mut a = Complex64::new(0.0, 0.0);
        let mut da = Complex64::new(0.0, 0.0);
        for l in &self.levels {
            let w = l.energy - e0;
            let z = Complex64::from_polar(l.population, -w * t);
            a += z;
            da += z * Complex64::new(0.0, -w);
        }
        2.0 * (a.conj() * da).re
    }

    /// Smallest fidelity the state can ever reach is at least
    /// `(2 p_max - 1)^2` when one level holds more than half the population.
    pub fn fidelity_floor(&self) -> f64 {
        let p = self.max_population();
        if p > 0.5 {
            (2.0 * p - 1.0).powi(2)
        } else {
            0.0
        }
    }
}

/// Speed-limit bound `pi alpha / (2 <E - E_ref>)` for a precomputed `alpha`.
///
/// `E_ref` is the ground energy, or with `strengthened` the lowest level with
/// population above `threshold`. A vanishing denominator yields `0` when
/// `eps = 1` and `+inf` otherwise.
pub fn ml_bound_with_alpha(
    system: &FiniteSystem,
    eps: Fidelity,
    alpha: f64,
    strengthened: bool,
    threshold: f64,
) -> f64 {
    let reference = if strengthened {
        system.lowest_populated_energy(threshold)
    } else {
        system.ground_energy()
    };
    let mean = system.mean_energy_above(reference);
    if eps.value() == 1.0 {
        return 0.0;
    }
    if mean <= 0.0 {
        return f64::INFINITY;
    }
    PI * alpha / (2.0 * mean)
}

/// Speed-limit bound with `alpha` from the Newton backend and the default
/// population threshold.
pub fn ml_bound(system: &FiniteSystem, eps: Fidelity, strengthened: bool) -> Result<f64> {
    system.validate()?;
    let alpha = alpha_newton(eps, &RootConfig::default())?.alpha;
    Ok(ml_bound_with_alpha(
        system,
        eps,
        alpha,
        strengthened,
        POPULATION_THRESHOLD,
    ))
}

/// [`POINTS_PER_UNIT`] grid points per unit of `(E_max - E_min) t_max`.
pub fn default_resolution(system: &FiniteSystem, t_max: f64) -> usize {
    ((POINTS_PER_UNIT * system.energy_spread() * t_max).ceil() as usize).max(2)
}

/// First time in `[0, t_max]` at which the fidelity drops to `eps`, or `None`.
pub fn first_passage_time(
    system: &FiniteSystem,
    eps: Fidelity,
    t_max: f64,
    resolution: usize,
) -> Result<Option<f64>> {
    Ok(first_passage_times(system, &[eps], t_max, resolution)?[0])
}

/// [`first_passage_time`] for several targets sharing one scan of the grid.
///
/// The grid has `resolution` points on `[0, t_max]`. A grid step that ends at or
/// below a target is refined by bisection; a grid-local minimum near a target
/// is refined on the fidelity derivative so tangential contacts are found.
pub fn first_passage_times(
    system: &FiniteSystem,
    targets: &[Fidelity],
    t_max: f64,
    resolution: usize,
) -> Result<Vec<Option<f64>>> {
    system.validate()?;
    if resolution < 2 {
        return Err(QslError::InvalidConfig(format!(
            "resolution {resolution} below 2"
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(QslError::InvalidConfig(format!(
            "invalid time horizon {t_max}"
        )));
    }

    let mut out = vec![None; targets.len()];
    // Targets in decreasing order: a higher target is always reached first.
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[b].value().total_cmp(&targets[a].value()));
    let mut pending = order.into_iter().peekable();
    while let Some(&i) = pending.peek() {
        if targets[i].value() >= 1.0 {
            out[i] = Some(0.0);
            pending.next();
        } else {
            break;
        }
    }
    if pending.peek().is_none() {
        return Ok(out);
    }

    let dt = t_max / (resolution - 1) as f64;
    let e0 = system.ground_energy();
    let pops: Vec<f64> = system.levels.iter().map(|l| l.population).collect();
    let freqs: Vec<f64> = system.levels.iter().map(|l| l.energy - e0).collect();
    let steps: Vec<Complex64> = freqs
        .iter()
        .map(|&w| Complex64::from_polar(1.0, -w * dt))
        .collect();
    let mut phasors: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); pops.len()];

    let mut f_prev2 = f64::NAN;
    let mut f_prev = 1.0;
    for k in 1..resolution {
        if k % RECOMPUTE_EVERY == 0 {
            let t = k as f64 * dt;
            for (p, &w) in phasors.iter_mut().zip(&freqs) {
                *p = Complex64::from_polar(1.0, -w * t);
            }
        } else {
            for (p, s) in phasors.iter_mut().zip(&steps) {
                *p *= s;
            }
        }
        let amp: Complex64 = phasors.iter().zip(&pops).map(|(p, &q)| p * q).sum();
        let f = amp.norm_sqr();
        let (t_prev, t) = ((k - 1) as f64 * dt, k as f64 * dt);

        // Tangential contact at a grid-local minimum.
        if k >= 2 && f_prev <= f_prev2 && f_prev < f {
            if let Some(&i) = pending.peek() {
                let target = targets[i].value();
                if f_prev - target <= TOUCH_WINDOW && f_prev > target {
                    let t_min = refine_minimum(system, t_prev - dt, t);
                    let f_min = system.fidelity(t_min);
                    while let Some(&j) = pending.peek() {
                        if f_min <= targets[j].value() + TOUCH_TOLERANCE {
                            out[j] = Some(t_min);
                            pending.next();
                        } else {
                            break;
                        }
                    }
                }
            }
        }
        while let Some(&i) = pending.peek() {
            let target = targets[i].value();
            if f <= target {
                out[i] = Some(refine_crossing(system, target, t_prev, t));
                pending.next();
            } else {
                break;
            }
        }
        if pending.peek().is_none() {
            break;
        }
        f_prev2 = f_prev;
        f_prev = f;
    }
    Ok(out)
}

// Fidelity is above `target` at `lo` and at or below it at `hi`.
fn refine_crossing(system: &FiniteSystem, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > TIME_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if system.fidelity(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

// The fidelity derivative is negative at `lo` and positive at `hi`.
fn refine_minimum(system: &FiniteSystem, mut lo: f64, mut hi: f64) -> f64 {
    lo = lo.max(0.0);
    while hi - lo > TIME_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if system.fidelity_derivative(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
