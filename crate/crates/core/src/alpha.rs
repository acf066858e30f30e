//! The speed-limit function `alpha(eps)` by four independent routes.
//!
//! * [`alpha_lower`]: maximize `(cos theta - sqrt eps) / sin phi(theta)` over
//!   `theta in [-acos sqrt eps, 0]` (each evaluation solves for `phi`).
//! * [`alpha_upper`]: minimize `2y [1 - sqrt(1 - (1 - eps) csc^2 y)] / pi` over
//!   `y in [asin sqrt(1 - eps), pi/2]` by golden-section search.
//! * [`alpha_newton`]: solve the first-order condition of the `y` objective by
//!   Newton's method from the midpoint of the `y` interval.
//! * [`alpha_glm_legacy`]: solve the older `z`-constraint for the optimal
//!   excited-state population and substitute into the `arccos` formula. This
//!   route is numerically fragile near `eps = 1` and is kept for diagnostics.
//!
//! All public entry points take the fidelity `eps = |<psi(0)|psi(t)>|^2`, never
//! its square root.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::rootfind::{brent, golden_minimize, newton, RootConfig, RootStatus};
use crate::tangency::{phi_of_theta, Angle, TangencyPoint};

/// Below this value of `1 - eps` the `y`-form backends return the
/// leading-order asymptote instead of optimizing.
pub const NEAR_ONE_CROSSOVER: f64 = 1e-14;

/// Root of `tan y = 2y` in `(0, pi/2)`: the minimizer of `y / sin^2 y`.
pub const NEAR_ONE_ARGMIN: f64 = 1.165_561_185_207_211_3;

/// `min_y y / (pi sin^2 y)`, so that `alpha(eps) ~ NEAR_ONE_SLOPE * (1 - eps)`.
pub const NEAR_ONE_SLOPE: f64 = 0.439_283_602_892_425_8;

/// Number of grid points seeding the `theta` maximization of [`alpha_lower`].
const LOWER_SEED_POINTS: usize = 63;

/// Fidelity between initial and evolved state, validated to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Fidelity(f64);

impl Fidelity {
    pub const ZERO: Fidelity = Fidelity(0.0);
    pub const ONE: Fidelity = Fidelity(1.0);

    pub fn new(eps: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eps) {
            Ok(Self(eps))
        } else {
            Err(QslError::InvalidFidelity(eps))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `|<psi(0)|psi(t)>| = sqrt eps`.
    pub fn overlap(self) -> f64 {
        self.0.sqrt()
    }

    /// `1 - eps`.
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Fidelity {
    type Error = QslError;

    fn try_from(value: f64) -> Result<Self> {
        Fidelity::new(value)
    }
}

impl From<Fidelity> for f64 {
    fn from(f: Fidelity) -> f64 {
        f.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lower,
    Upper,
    Newton,
    GlmLegacy,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Lower,
        Method::Upper,
        Method::Newton,
        Method::GlmLegacy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lower => "lower",
            Method::Upper => "upper",
            Method::Newton => "newton",
            Method::GlmLegacy => "glm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" => Ok(Method::Lower),
            "upper" => Ok(Method::Upper),
            "newton" => Ok(Method::Newton),
            "glm" | "glm-legacy" | "glm_legacy" => Ok(Method::GlmLegacy),
            other => Err(format!(
                "unknown method '{other}' (expected lower, upper, newton or glm)"
            )),
        }
    }
}

/// Root solver for the legacy `z`-constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GlmRoot {
    /// Newton from `z0 = p (1 - sqrt eps)/2 + (1 - p)/2`.
    Newton { p: f64 },
    /// Brent on the open interval, shrunk by `1e-12` of its width at each end.
    Brent,
}

/// One evaluation of `alpha(eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub epsilon: Fidelity,
    /// `NaN` when the backend failed to produce a value.
    #[serde(with = "crate::sentinel")]
    pub alpha: f64,
    pub method: Method,
    pub iterations: usize,
    #[serde(with = "crate::sentinel")]
    pub residual: f64,
    pub status: RootStatus,
    /// Optimizing `theta` (lower), `y` (upper, newton) or `z` (glm).
    pub argopt: f64,
    pub diagnostic: Option<String>,
}

impl AlphaResult {
    fn exact(eps: Fidelity, alpha: f64, method: Method, argopt: f64) -> Self {
        Self {
            epsilon: eps,
            alpha,
            method,
            iterations: 0,
            residual: 0.0,
            status: RootStatus::Converged,
            argopt,
            diagnostic: None,
        }
    }
}

/// Evaluate `alpha(eps)` with the given backend. `GlmLegacy` uses `glm_root`.
pub fn alpha(
    eps: Fidelity,
    method: Method,
    glm_root: GlmRoot,
    cfg: &RootConfig,
) -> Result<AlphaResult> {
    match method {
        Method::Lower => alpha_lower(eps, cfg),
        Method::Upper => alpha_upper(eps, cfg),
        Method::Newton => alpha_newton(eps, cfg),
        Method::GlmLegacy => alpha_glm_legacy(eps, glm_root, cfg),
    }
}

// ---------------------------------------------------------------------------
// Lower route: maximization over the tangency anchor theta.

/// The maximizer of the lower-bound objective, shared with state construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerOptimum {
    pub theta: f64,
    pub tangency: TangencyPoint,
    /// `max_theta (cos theta - sqrt eps) / sin phi(theta)`, i.e. `pi alpha / 2`.
    pub value: f64,
    pub iterations: usize,
    /// Stationarity residual at `theta`.
    pub residual: f64,
    pub status: RootStatus,
}

/// `cos theta - sqrt eps`, written to avoid cancellation as `eps -> 1`.
fn lower_numerator(eps: Fidelity, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    eps.complement() / (1.0 + eps.overlap()) - 2.0 * s * s
}

/// `(cos theta - sqrt eps) / sin phi(theta)`.
pub fn lower_objective(eps: Fidelity, theta: f64, cfg: &RootConfig) -> Result<f64> {
    let tp = phi_of_theta(Angle::new(theta)?, cfg)?;
    Ok(lower_numerator(eps, theta) / tp.slope)
}

/// Derivative of the lower objective times `sin^2 phi`:
/// `-sin theta sin phi - (cos theta - sqrt eps)(sin phi - sin theta)/(phi - theta)`.
fn lower_stationarity(eps: Fidelity, tp: &TangencyPoint) -> f64 {
    let t = tp.theta.value();
    -t.sin() * tp.slope - lower_numerator(eps, t) * (tp.slope - t.sin()) / (tp.phi - t)
}

/// Left end of the `theta` interval, `-acos sqrt eps`.
pub fn theta_min(eps: Fidelity) -> f64 {
    -eps.complement().sqrt().atan2(eps.overlap())
}

/// Locate `theta_opt`: 64-point seed grid, golden-section refinement inside the
/// best grid cell, then a Brent polish on the analytic stationarity condition.
pub fn lower_optimum(eps: Fidelity, cfg: &RootConfig) -> Result<LowerOptimum> {
    cfg.validate()?;
    let tangency_at = |t: f64| phi_of_theta(Angle::new(t)?, cfg);
    if eps.value() == 1.0 {
        let tp = tangency_at(0.0)?;
        return Ok(LowerOptimum {
            theta: 0.0,
            tangency: tp,
            value: 0.0,
            iterations: 0,
            residual: 0.0,
            status: RootStatus::Converged,
        });
    }

    let lo = theta_min(eps);
    let objective = |t: f64| -> f64 {
        match tangency_at(t) {
            Ok(tp) => lower_numerator(eps, t) / tp.slope,
            Err(_) => f64::NAN,
        }
    };

    let step = -lo / LOWER_SEED_POINTS as f64;
    let grid: Vec<f64> = (0..=LOWER_SEED_POINTS)
        .map(|i| lo + step * i as f64)
        .collect();
    let mut best = 0;
    let mut best_val = f64::MIN;
    for (i, &t) in grid.iter().enumerate() {
        let v = objective(t);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let cell_lo = grid[best.saturating_sub(1)];
    let cell_hi = grid[(best + 1).min(LOWER_SEED_POINTS)].min(0.0);

    let coarse = RootConfig {
        rel_tol: cfg.rel_tol.max(1e-8),
        ..*cfg
    };
    let gold = golden_minimize(|t| -objective(t), cell_lo, cell_hi, &coarse)?;
    let mut theta = gold.argmin;
    let mut iterations = gold.iterations;
    let mut status = RootStatus::Converged;

    let stationarity = |t: f64| -> f64 {
        match tangency_at(t) {
            Ok(tp) => lower_stationarity(eps, &tp),
            Err(_) => f64::NAN,
        }
    };
    let (s_lo, s_hi) = (stationarity(cell_lo), stationarity(cell_hi));
    if s_lo > 0.0 && s_hi < 0.0 {
        let out = brent(stationarity, cell_lo, cell_hi, cfg)?;
        iterations += out.iterations;
        theta = out.root;
        status = match out.status {
            RootStatus::Stalled => RootStatus::Converged,
            s => s,
        };
    }

    let tp = tangency_at(theta)?;
    Ok(LowerOptimum {
        theta,
        tangency: tp,
        value: lower_numerator(eps, theta) / tp.slope,
        iterations,
        residual: lower_stationarity(eps, &tp),
        status,
    })
}

/// `alpha` from the tangent-line lower bound.
pub fn alpha_lower(eps: Fidelity, cfg: &RootConfig) -> Result<AlphaResult> {
    let opt = lower_optimum(eps, cfg)?;
    Ok(AlphaResult {
        epsilon: eps,
        alpha: 2.0 * opt.value / PI,
        method: Method::Lower,
        iterations: opt.iterations,
        residual: opt.residual,
        status: opt.status,
        argopt: opt.theta,
        diagnostic: None,
    })
}

// ---------------------------------------------------------------------------
// y-form: the two-level upper bound and its stationarity condition.

/// Left end of the `y` interval, `asin sqrt(1 - eps)`.
pub fn y_min(eps: Fidelity) -> f64 {
    FRAC_PI_2 - eps.overlap().asin()
}

/// `2y [1 - sqrt(1 - (1 - eps) csc^2 y)] / pi`.
///
/// `1 - sqrt(1 - t)` is evaluated as `t / (1 + sqrt(1 - t))` and the radicand
/// as `sin(y - y_min) sin(y + y_min) / sin^2 y`; negative radicands from
/// rounding at `y = y_min` are clamped to zero.
pub fn upper_objective(eps: Fidelity, y: f64) -> f64 {
    let delta = eps.complement();
    if delta == 0.0 {
        return 0.0;
    }
    let ylo = y_min(eps);
    let sy = y.sin();
    let radicand = ((y - ylo).sin() * (y + ylo).sin()).max(0.0) / (sy * sy);
    2.0 * y / PI * (delta / (sy * sy)) / (1.0 + radicand.sqrt())
}

fn near_one(eps: Fidelity, method: Method) -> AlphaResult {
    let mut r = AlphaResult::exact(
        eps,
        NEAR_ONE_SLOPE * eps.complement(),
        method,
        NEAR_ONE_ARGMIN,
    );
    r.diagnostic = Some(format!(
        "1 - eps below {NEAR_ONE_CROSSOVER:e}: leading-order asymptote"
    ));
    r
}

/// `alpha` from the minimum over two-level states.
pub fn alpha_upper(eps: Fidelity, cfg: &RootConfig) -> Result<AlphaResult> {
    cfg.validate()?;
    match eps.value() {
        0.0 => return Ok(AlphaResult::exact(eps, 1.0, Method::Upper, FRAC_PI_2)),
        1.0 => return Ok(AlphaResult::exact(eps, 0.0, Method::Upper, FRAC_PI_2)),
        _ if eps.complement() < NEAR_ONE_CROSSOVER => return Ok(near_one(eps, Method::Upper)),
        _ => {}
    }
    let m = golden_minimize(|y| upper_objective(eps, y), y_min(eps), FRAC_PI_2, cfg)?;
    let status = if m.iterations < cfg.max_iter {
        RootStatus::Converged
    } else {
        RootStatus::MaxIterExceeded
    };
    Ok(AlphaResult {
        epsilon: eps,
        alpha: m.min,
        method: Method::Upper,
        iterations: m.iterations,
        residual: stationarity_lhs_minus_one(eps, m.argmin),
        status,
        argopt: m.argmin,
        diagnostic: None,
    })
}

// The Newton route works in s = pi/2 - y, where the interval is [0, w] with
// w = asin sqrt eps. Newton's iteration is invariant under this affine change,
// and s keeps full relative precision when eps -> 0 squeezes y against pi/2.

struct SForm {
    delta: f64,
    w: f64,
}

impl SForm {
    fn new(eps: Fidelity) -> Self {
        Self {
            delta: eps.complement(),
            w: eps.overlap().asin(),
        }
    }

    /// `sqrt(1 - (1 - eps) csc^2 y)` at `y = pi/2 - s`.
    fn radical(&self, s: f64) -> f64 {
        let c = s.cos();
        ((self.w - s).sin() * (self.w + s).sin()).max(0.0).sqrt() / c
    }

    /// `(LHS - 1) / (1 - eps)` of the stationarity condition.
    fn residual(&self, s: f64) -> f64 {
        let d = self.radical(s);
        let c = s.cos();
        let sec2 = 1.0 / (c * c);
        sec2 * ((FRAC_PI_2 - s) * s.tan() / d - 1.0 / (1.0 + d))
    }

    fn residual_derivative(&self, s: f64) -> f64 {
        let d = self.radical(s);
        let c = s.cos();
        let t = s.tan();
        let sec2 = 1.0 / (c * c);
        let y = FRAC_PI_2 - s;
        let dd = -self.delta * t * sec2 / d;
        let k = y * t / d - 1.0 / (1.0 + d);
        let dk = ((-t + y * sec2) * d - y * t * dd) / (d * d) + dd / ((1.0 + d) * (1.0 + d));
        2.0 * sec2 * t * k + sec2 * dk
    }

    fn objective(&self, s: f64) -> f64 {
        let c = s.cos();
        2.0 * (FRAC_PI_2 - s) / PI * (self.delta / (c * c)) / (1.0 + self.radical(s))
    }
}

/// Left side minus one of the first-order condition
/// `[1 + (1 - eps)(y cot y - 1) csc^2 y] / sqrt(1 - (1 - eps) csc^2 y) = 1`.
pub fn stationarity_lhs_minus_one(eps: Fidelity, y: f64) -> f64 {
    let sf = SForm::new(eps);
    sf.delta * sf.residual(FRAC_PI_2 - y)
}

/// `d/dy` of [`stationarity_lhs_minus_one`].
pub fn stationarity_lhs_derivative(eps: Fidelity, y: f64) -> f64 {
    let sf = SForm::new(eps);
    -sf.delta * sf.residual_derivative(FRAC_PI_2 - y)
}

/// `alpha` from Newton's method on the first-order condition, started at the
/// midpoint of `[asin sqrt(1 - eps), pi/2]`.
///
/// The convergence test is applied to `(LHS - 1) / (1 - eps)`, which stays of
/// order one as `eps -> 1`; `residual` reports the unscaled `LHS - 1`.
pub fn alpha_newton(eps: Fidelity, cfg: &RootConfig) -> Result<AlphaResult> {
    cfg.validate()?;
    match eps.value() {
        0.0 => return Ok(AlphaResult::exact(eps, 1.0, Method::Newton, FRAC_PI_2)),
        1.0 => return Ok(AlphaResult::exact(eps, 0.0, Method::Newton, FRAC_PI_2)),
        _ if eps.complement() < NEAR_ONE_CROSSOVER => return Ok(near_one(eps, Method::Newton)),
        _ => {}
    }
    let sf = SForm::new(eps);
    let out = newton_from(&sf, 0.5 * sf.w, cfg)?;
    let y = FRAC_PI_2 - out.root;
    let alpha = if out.status.is_converged() {
        sf.objective(out.root)
    } else {
        f64::NAN
    };
    Ok(AlphaResult {
        epsilon: eps,
        alpha,
        method: Method::Newton,
        iterations: out.iterations,
        residual: sf.delta * out.residual,
        status: out.status,
        argopt: y,
        diagnostic: None,
    })
}

fn newton_from(sf: &SForm, s0: f64, cfg: &RootConfig) -> Result<crate::rootfind::RootOutcome> {
    newton(
        |s| sf.residual(s),
        |s| sf.residual_derivative(s),
        s0,
        Some((0.0, sf.w)),
        cfg,
    )
}

/// Newton's outcome from many starting points across the `y` interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub epsilon: Fidelity,
    pub guesses: usize,
    pub converged: usize,
    pub max_iterations: usize,
    /// Largest distance between any converged root and the midpoint-start root.
    pub root_spread: f64,
}

/// Sample `guesses` starting points strictly inside the `y` interval and record
/// how many converge to the midpoint-start root.
pub fn newton_basin(eps: Fidelity, guesses: usize, cfg: &RootConfig) -> Result<BasinReport> {
    if !(eps.value() > 0.0 && eps.value() < 1.0) {
        return Err(QslError::UnsupportedFidelity(eps.value()));
    }
    let sf = SForm::new(eps);
    let reference = newton_from(&sf, 0.5 * sf.w, cfg)?.root;
    let mut converged = 0;
    let mut max_iterations = 0;
    let mut root_spread: f64 = 0.0;
    for i in 0..guesses {
        let s0 = sf.w * (i as f64 + 0.5) / guesses as f64;
        let out = newton_from(&sf, s0, cfg)?;
        if out.status.is_converged() {
            converged += 1;
            max_iterations = max_iterations.max(out.iterations);
            root_spread = root_spread.max((out.root - reference).abs());
        }
    }
    Ok(BasinReport {
        epsilon: eps,
        guesses,
        converged,
        max_iterations,
        root_spread,
    })
}

// ---------------------------------------------------------------------------
// Legacy z-constraint.

/// Terms of `acos[1 - (1-eps)/(2z(1-z))] = (1-2z)/(1-z) sqrt((1-eps)/(eps-1+4z(1-z)))`
/// and their derivatives in `z`.
struct GlmTerms {
    arccos: f64,
    algebraic: f64,
    d_arccos: f64,
    d_algebraic: f64,
}

fn glm_terms(eps: Fidelity, z: f64) -> GlmTerms {
    let delta = eps.complement();
    let sq = eps.overlap();
    let lo = 0.5 * (1.0 - sq);
    let w = z * (1.0 - z);
    // eps - 1 + 4z(1-z) = eps - (1-2z)^2 = 2(z - z_min)(1 + sqrt eps - 2z)
    let gap = 2.0 * (z - lo) * (1.0 + sq - 2.0 * z);
    let u = (1.0 - delta / (2.0 * w)).clamp(-1.0, 1.0);
    let arccos = u.acos();
    let slope = (1.0 - 2.0 * z) / (1.0 - z);
    let root = (delta / gap).sqrt();
    let algebraic = slope * root;

    let d_arccos = -delta.sqrt() * (1.0 - 2.0 * z) / (w * gap.sqrt());
    let d_slope = -1.0 / ((1.0 - z) * (1.0 - z));
    let d_root = -2.0 * delta.sqrt() * (1.0 - 2.0 * z) / (gap * gap.sqrt());
    GlmTerms {
        arccos,
        algebraic,
        d_arccos,
        d_algebraic: d_slope * root + slope * d_root,
    }
}

/// `arccos side / algebraic side - 1`; zero at the optimal population `z`.
pub fn glm_constraint(eps: Fidelity, z: f64) -> f64 {
    let t = glm_terms(eps, z);
    t.arccos / t.algebraic - 1.0
}

pub fn glm_constraint_derivative(eps: Fidelity, z: f64) -> f64 {
    let t = glm_terms(eps, z);
    (t.d_arccos * t.algebraic - t.arccos * t.d_algebraic) / (t.algebraic * t.algebraic)
}

/// `(2z/pi) acos[1 - (1 - eps)/(2z(1 - z))]`.
pub fn glm_alpha_of_z(eps: Fidelity, z: f64) -> f64 {
    let u = (1.0 - eps.complement() / (2.0 * z * (1.0 - z))).clamp(-1.0, 1.0);
    2.0 * z / PI * u.acos()
}

/// Initial guess `p (1 - sqrt eps)/2 + (1 - p)/2`.
pub fn glm_initial_guess(eps: Fidelity, p: f64) -> f64 {
    p * (1.0 - eps.overlap()) / 2.0 + (1.0 - p) / 2.0
}

fn glm_sign_changes(eps: Fidelity) -> usize {
    let lo = 0.5 * (1.0 - eps.overlap());
    let n = 64;
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for i in 1..n {
        let z = lo + (0.5 - lo) * i as f64 / n as f64;
        let g = glm_constraint(eps, z);
        if !g.is_finite() {
            continue;
        }
        if let Some(p) = prev {
            if p.signum() != g.signum() {
                changes += 1;
            }
        }
        prev = Some(g);
    }
    changes
}

/// `alpha` from the legacy `z`-constraint. Failures are reported, not repaired.
pub fn alpha_glm_legacy(eps: Fidelity, root: GlmRoot, cfg: &RootConfig) -> Result<AlphaResult> {
    cfg.validate()?;
    let e = eps.value();
    if e == 1.0 {
        return Err(QslError::UnsupportedFidelity(e));
    }
    if e == 0.0 {
        return Ok(AlphaResult::exact(eps, 1.0, Method::GlmLegacy, 0.5));
    }
    let lo = 0.5 * (1.0 - eps.overlap());
    let out = match root {
        GlmRoot::Newton { p } => newton(
            |z| glm_constraint(eps, z),
            |z| glm_constraint_derivative(eps, z),
            glm_initial_guess(eps, p),
            Some((lo, 0.5)),
            cfg,
        )?,
        GlmRoot::Brent => {
            let pad = 1e-12 * (0.5 - lo);
            let mut out = brent(|z| glm_constraint(eps, z), lo + pad, 0.5 - pad, cfg)?;
            // A bracket collapsed onto a sign change is a root at working precision.
            if out.status == RootStatus::Stalled {
                out.status = RootStatus::Converged;
            }
            out
        }
    };
    let changes = glm_sign_changes(eps);
    let mut notes = Vec::new();
    if changes > 1 {
        notes.push(format!(
            "constraint changes sign {changes} times on a 64-point scan"
        ));
    }
    let alpha = if out.status.is_converged() {
        glm_alpha_of_z(eps, out.root)
    } else {
        notes.push(format!(
            "z-constraint solve failed ({}) at z = {:.6e} after {} iterations",
            out.status, out.root, out.iterations
        ));
        f64::NAN
    };
    Ok(AlphaResult {
        epsilon: eps,
        alpha,
        method: Method::GlmLegacy,
        iterations: out.iterations,
        residual: out.residual,
        status: out.status,
        argopt: out.root,
        diagnostic: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    })
}

/// Map a tangency anchor `theta` onto the older `(q, m)` parametrization of
/// `cos x + q sin x >= 1 - m x`: `q = -tan theta`, `m = sin phi(theta) / cos theta`.
pub fn glm_parameters(theta: Angle, cfg: &RootConfig) -> Result<(f64, f64)> {
    let t = theta.value();
    if t.abs() >= FRAC_PI_2 {
        return Err(QslError::AngleOutOfDomain {
            value: t,
            lo: -FRAC_PI_2,
            hi: FRAC_PI_2,
        });
    }
    let tp = phi_of_theta(theta, cfg)?;
    Ok((-t.tan(), tp.slope / t.cos()))
}

// ---------------------------------------------------------------------------
// Tables.

/// One row of a multi-backend comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub epsilon: f64,
    pub alpha_lower: Option<f64>,
    pub alpha_upper: Option<f64>,
    pub alpha_newton: Option<f64>,
    pub alpha_glm: Option<f64>,
    /// Largest pairwise `|a - b| / max(|a|, |b|)` among the values present.
    pub max_rel_diff: f64,
    pub iters_newton: Option<usize>,
    /// `method:status` for every requested backend that did not converge.
    pub status_flags: Vec<String>,
}

impl TableRow {
    pub fn all_converged(&self) -> bool {
        self.status_flags.is_empty()
    }

    pub fn status_string(&self) -> String {
        if self.status_flags.is_empty() {
            "ok".to_string()
        } else {
            self.status_flags.join(";")
        }
    }
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Evaluate the requested backends on every grid point, in parallel.
/// Rows come back in input order; a failing backend only flags its row.
pub fn alpha_table(
    eps_grid: &[Fidelity],
    methods: &[Method],
    glm_root: GlmRoot,
    cfg: &RootConfig,
) -> Vec<TableRow> {
    eps_grid
        .par_iter()
        .map(|&eps| table_row(eps, methods, glm_root, cfg))
        .collect()
}

fn table_row(eps: Fidelity, methods: &[Method], glm_root: GlmRoot, cfg: &RootConfig) -> TableRow {
    let mut row = TableRow {
        epsilon: eps.value(),
        alpha_lower: None,
        alpha_upper: None,
        alpha_newton: None,
        alpha_glm: None,
        max_rel_diff: 0.0,
        iters_newton: None,
        status_flags: Vec::new(),
    };
    for &m in Method::ALL.iter().filter(|m| methods.contains(m)) {
        let value = match alpha(eps, m, glm_root, cfg) {
            Ok(r) => {
                if m == Method::Newton {
                    row.iters_newton = Some(r.iterations);
                }
                if !r.status.is_converged() {
                    row.status_flags.push(format!("{m}:{}", r.status));
                }
                r.alpha.is_finite().then_some(r.alpha)
            }
            Err(e) => {
                row.status_flags.push(format!("{m}:error({e})"));
                None
            }
        };
        match m {
            Method::Lower => row.alpha_lower = value,
            Method::Upper => row.alpha_upper = value,
            Method::Newton => row.alpha_newton = value,
            Method::GlmLegacy => row.alpha_glm = value,
        }
    }
    let values: Vec<f64> = [
        row.alpha_lower,
        row.alpha_upper,
        row.alpha_newton,
        row.alpha_glm,
    ]
    .into_iter()
    .flatten()
    .collect();
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            row.max_rel_diff = row.max_rel_diff.max(relative_difference(a, b));
        }
    }
    row
}
