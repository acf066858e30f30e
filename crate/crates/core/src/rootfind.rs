//! Scalar root finding and one-dimensional minimization.
//!
//! Every kernel takes its target function as a closure and keeps no state
//! between calls. Numerical outcomes (convergence, escape from a bracket,
//! a vanishing derivative) are reported through [`RootStatus`]; only
//! malformed input is an `Err`.

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};

/// Stopping rules shared by all kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    /// Residual threshold: `|f(root)| <= abs_tol` counts as converged.
    pub abs_tol: f64,
    /// Step / bracket-width threshold, relative to the magnitude of the iterate.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_iter: 100,
        }
    }
}

impl RootConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_iter,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QslError::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QslError::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(QslError::InvalidConfig(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// How an iterative solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStatus {
    /// `|f(root)| <= abs_tol`.
    Converged,
    MaxIterExceeded,
    /// A Newton iterate left the supplied bracket. The escaped iterate is kept
    /// as `root`; it is never projected back.
    LeftBracket,
    DerivativeVanished,
    /// The step or bracket shrank below `rel_tol` while the residual stayed
    /// above `abs_tol` (a pole, or the rounding floor of `f`).
    Stalled,
    /// `f` or its derivative evaluated to NaN or infinity at an iterate.
    NonFinite,
}

impl RootStatus {
    pub fn is_converged(self) -> bool {
        self == RootStatus::Converged
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RootStatus::Converged => "converged",
            RootStatus::MaxIterExceeded => "max_iter_exceeded",
            RootStatus::LeftBracket => "left_bracket",
            RootStatus::DerivativeVanished => "derivative_vanished",
            RootStatus::Stalled => "stalled",
            RootStatus::NonFinite => "non_finite",
        }
    }
}

impl std::fmt::Display for RootStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOutcome {
    pub root: f64,
    /// `f(root)` for bracketing methods; the last evaluated residual for Newton.
    pub residual: f64,
    pub iterations: usize,
    pub status: RootStatus,
}

/// Result of [`golden_minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub argmin: f64,
    pub min: f64,
    pub iterations: usize,
}

/// Newton-Raphson iteration from `x0`.
///
/// With a bracket, an iterate falling outside `[lo, hi]` stops the solve with
/// [`RootStatus::LeftBracket`]. The derivative is treated as vanished when the
/// Newton step would exceed `|f| / (eps * |f|)`, i.e. `|df| <= eps * |f|`.
pub fn newton<F, D>(
    f: F,
    df: D,
    x0: f64,
    bracket: Option<(f64, f64)>,
    cfg: &RootConfig,
) -> Result<RootOutcome>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    cfg.validate()?;
    if let Some((lo, hi)) = bracket {
        if !(lo <= hi) {
            return Err(QslError::InvalidInterval { lo, hi });
        }
        if !(lo..=hi).contains(&x0) {
            return Err(QslError::GuessOutsideBracket { x0, lo, hi });
        }
    }

    let mut x = x0;
    let mut fx = f(x);
    for iter in 0..cfg.max_iter {
        if !fx.is_finite() {
            return Ok(outcome(x, fx, iter, RootStatus::NonFinite));
        }
        if fx.abs() <= cfg.abs_tol {
            return Ok(outcome(x, fx, iter, RootStatus::Converged));
        }
        let dfx = df(x);
        if !dfx.is_finite() {
            return Ok(outcome(x, fx, iter, RootStatus::NonFinite));
        }
        if dfx == 0.0 || dfx.abs() <= f64::EPSILON * fx.abs() {
            return Ok(outcome(x, fx, iter, RootStatus::DerivativeVanished));
        }

        let x_new = x - fx / dfx;
        if let Some((lo, hi)) = bracket {
            if !(lo..=hi).contains(&x_new) {
                return Ok(outcome(x_new, fx, iter + 1, RootStatus::LeftBracket));
            }
        }
        let step = (x_new - x).abs();
        x = x_new;
        fx = f(x);
        if step <= cfg.rel_tol * x.abs().max(f64::MIN_POSITIVE) {
            let status = if fx.abs() <= cfg.abs_tol {
                RootStatus::Converged
            } else if fx.is_finite() {
                RootStatus::Stalled
            } else {
                RootStatus::NonFinite
            };
            return Ok(outcome(x, fx, iter + 1, status));
        }
    }
    let status = if fx.abs() <= cfg.abs_tol {
        RootStatus::Converged
    } else {
        RootStatus::MaxIterExceeded
    };
    Ok(outcome(x, fx, cfg.max_iter, status))
}

/// Brent's method (inverse quadratic interpolation, secant and bisection).
///
/// Stops when `|f(b)| <= abs_tol` or the bracket is narrower than
/// `rel_tol * max(|lo|, |hi|)` (plus a few ulps of the current iterate). When
/// any of the three retained function values is infinite the step falls back to
/// bisection, so endpoint singularities are acceptable.
pub fn brent<F>(f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<RootOutcome>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(QslError::InvalidInterval { lo, hi });
    }

    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() || fa.signum() * fb.signum() > 0.0 && fa != 0.0 && fb != 0.0 {
        return Err(QslError::NotBracketing { f_lo: fa, f_hi: fb });
    }
    if fa == 0.0 {
        return Ok(outcome(a, fa, 0, RootStatus::Converged));
    }
    if fb == 0.0 {
        return Ok(outcome(b, fb, 0, RootStatus::Converged));
    }

    let width_tol = 0.5 * cfg.rel_tol * lo.abs().max(hi.abs());
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol = 2.0 * f64::EPSILON * b.abs() + width_tol;
        let m = 0.5 * (c - b);
        if fb.abs() <= cfg.abs_tol {
            return Ok(outcome(b, fb, iter, RootStatus::Converged));
        }
        if m.abs() <= tol {
            return Ok(outcome(b, fb, iter, RootStatus::Stalled));
        }

        let interpolate = e.abs() >= tol
            && fa.abs() > fb.abs()
            && fa.is_finite()
            && fb.is_finite()
            && fc.is_finite();
        if interpolate {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Ok(outcome(b, fb, iter + 1, RootStatus::NonFinite));
        }
    }
    let status = if fb.abs() <= cfg.abs_tol {
        RootStatus::Converged
    } else {
        RootStatus::MaxIterExceeded
    };
    Ok(outcome(b, fb, cfg.max_iter, status))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
///
/// Assumes `f` is unimodal on the interval. The endpoints are compared against
/// the interior result, so monotone functions return the correct endpoint.
pub fn golden_minimize<F>(f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(QslError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(Minimum {
            argmin: lo,
            min: f(lo),
            iterations: 0,
        });
    }

    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if b - a <= cfg.rel_tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        iterations += 1;
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }

    let (mut argmin, mut min) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < min {
            argmin = x;
            min = fx;
        }
    }
    Ok(Minimum {
        argmin,
        min,
        iterations,
    })
}

fn outcome(root: f64, residual: f64, iterations: usize, status: RootStatus) -> RootOutcome {
    RootOutcome {
        root,
        residual,
        iterations,
        status,
    }
}
