//! Tangent lines to the cosine curve anchored at `(theta, cos theta)`.
//!
//! For `theta` in `(-pi, pi)` the steepest line through `(theta, cos theta)`
//! that stays below `cos x` for all `x >= theta` touches the curve a second
//! time at `phi(theta)`, where its slope is `-sin phi`. The quantities here
//! (`phi`, the slope `A = sin phi`, the gap `f(x) = cos x - cos theta +
//! (x - theta) sin phi`) feed both the lower bound on `alpha` and the
//! construction of saturating states.
//!
//! Two branches:
//! * `theta < pi/2` (interval `I1`): `phi` is the unique root of
//!   `h(x) = cos theta - cos x - (x - theta) sin x` on `[max(pi/2, |theta|), pi]`.
//! * `theta >= pi/2` (interval `I2`): `phi = theta`.
//!
//! Angles within `1e-9` of `+-pi` are rejected; see [`Angle`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::rootfind::{brent, RootConfig, RootStatus};

/// Distance kept from `+-pi`.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// A tangency anchor angle in `(-pi + 1e-9, pi - 1e-9)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Angle(f64);

impl Angle {
    pub const MIN: f64 = -PI + DOMAIN_MARGIN;
    pub const MAX: f64 = PI - DOMAIN_MARGIN;

    pub fn new(value: f64) -> Result<Self> {
        if value > Self::MIN && value < Self::MAX {
            Ok(Self(value))
        } else {
            Err(QslError::AngleOutOfDomain {
                value,
                lo: Self::MIN,
                hi: Self::MAX,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `theta < pi/2`, where `phi > theta` and the derivative formula applies.
    pub fn in_interior_branch(self) -> bool {
        self.0 < FRAC_PI_2
    }
}

impl TryFrom<f64> for Angle {
    type Error = QslError;

    fn try_from(value: f64) -> Result<Self> {
        Angle::new(value)
    }
}

/// The second contact point of the tangent line anchored at `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyPoint {
    pub theta: Angle,
    pub phi: f64,
    /// `sin phi`, the supremum chord slope `A_theta`.
    pub slope: f64,
    /// Tangency residual `h(phi)`; exactly zero on the `theta >= pi/2` branch.
    pub residual: f64,
}

impl TangencyPoint {
    /// `f_theta(x) = cos x - cos theta + (x - theta) sin phi`, nonnegative for `x >= theta`.
    pub fn gap(&self, x: f64) -> f64 {
        let theta = self.theta.value();
        x.cos() - theta.cos() + (x - theta) * self.slope
    }

    /// Ranges valid for `theta` in `[-pi/2, 0]`:
    /// `phi in (pi/2, pi)`, `phi - theta in (pi/2, 3pi/2)`, `phi + theta in (0, pi)`.
    pub fn ranges_hold(&self) -> bool {
        let theta = self.theta.value();
        let open = |v: f64, lo: f64, hi: f64| v > lo && v < hi;
        open(self.phi, FRAC_PI_2, PI)
            && open(self.phi - theta, FRAC_PI_2, 3.0 * FRAC_PI_2)
            && open(self.phi + theta, 0.0, PI)
    }
}

/// `x - sin x`, accurate to a few ulps including near zero.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return x - x.sin();
    }
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -x2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// Tangency residual `h(x) = cos theta - cos x - (x - theta) sin x`.
///
/// For `theta` within 1 of `pi/2` it is evaluated as
/// `-(u - sin u) - (v - sin v) + 2 (u + v) sin^2(v/2)` with `u = pi/2 - theta`,
/// `v = x - pi/2`, which keeps its sign reliable when `h` is of order
/// `(pi/2 - theta)^3`.
pub fn tangency_residual(theta: f64, x: f64) -> f64 {
    let u = FRAC_PI_2 - theta;
    if u < 1.0 {
        let v = x - FRAC_PI_2;
        let half = (0.5 * v).sin();
        -x_minus_sin(u) - x_minus_sin(v) + 2.0 * (u + v) * half * half
    } else {
        // 2cos^2(theta/2) - 2cos^2(x/2) keeps 1 + cos theta exact near theta = -pi.
        let ct = (0.5 * theta).cos();
        let cx = (0.5 * x).cos();
        2.0 * (ct * ct - cx * cx) - (x - theta) * x.sin()
    }
}

/// Locate `phi(theta)` and the slope `sin phi`.
///
/// The convergence test in `cfg` is applied to `h(x) / (u - sin u)` with
/// `u = pi/2 - theta`; the reported residual is the unscaled `h(phi)`.
pub fn phi_of_theta(theta: Angle, cfg: &RootConfig) -> Result<TangencyPoint> {
    let t = theta.value();
    if !theta.in_interior_branch() {
        return Ok(TangencyPoint {
            theta,
            phi: t,
            slope: t.sin(),
            residual: 0.0,
        });
    }
    let lo = FRAC_PI_2.max(t.abs());
    let h = |x: f64| tangency_residual(t, x);
    // h(lo) < 0 < h(pi) analytically; undo rounding at the lower end by
    // nudging the bracket outward by a few ulps.
    let mut lo_b = lo;
    for _ in 0..4 {
        if h(lo_b) < 0.0 {
            break;
        }
        lo_b -= 4.0 * f64::EPSILON * lo_b.abs();
    }
    // The root can sit between the double nearest pi and pi itself.
    if h(PI) <= 0.0 {
        return Ok(TangencyPoint {
            theta,
            phi: PI,
            slope: PI.sin(),
            residual: h(PI),
        });
    }
    // abs_tol applies to h relative to its magnitude |h(pi/2)| = u - sin u,
    // which shrinks like u^3 as theta -> pi/2.
    let scale = x_minus_sin(FRAC_PI_2 - t);
    let out = brent(|x| h(x) / scale, lo_b, PI, cfg)?;
    let phi = out.root.clamp(lo, PI);
    if !matches!(out.status, RootStatus::Converged | RootStatus::Stalled) {
        return Err(QslError::InvalidConfig(format!(
            "tangency solve for theta = {t} ended with status {}",
            out.status
        )));
    }
    Ok(TangencyPoint {
        theta,
        phi,
        slope: phi.sin(),
        residual: h(phi),
    })
}

/// `phi(theta)` with the default solver configuration.
pub fn phi(theta: f64) -> Result<f64> {
    Ok(phi_of_theta(Angle::new(theta)?, &RootConfig::default())?.phi)
}

/// `A_theta = sin phi(theta)`.
pub fn a_theta(theta: Angle) -> Result<f64> {
    Ok(phi_of_theta(theta, &RootConfig::default())?.slope)
}

/// `f_theta(x)`, computing `phi(theta)` with the default configuration.
pub fn f_theta(theta: Angle, x: f64) -> Result<f64> {
    Ok(phi_of_theta(theta, &RootConfig::default())?.gap(x))
}

/// `d phi / d theta`. On `I1` this is `(sin phi - sin theta) / ((phi - theta) cos phi)`;
/// on `theta >= pi/2`, where `phi = theta`, it is 1.
pub fn dphi_dtheta(theta: Angle) -> Result<f64> {
    if !theta.in_interior_branch() {
        return Ok(1.0);
    }
    dphi_dtheta_strict(theta)
}

/// The closed-form derivative on `I1 = (-pi, pi/2)` only; `theta >= pi/2` is a domain error.
pub fn dphi_dtheta_strict(theta: Angle) -> Result<f64> {
    let t = theta.value();
    if !theta.in_interior_branch() {
        return Err(QslError::AngleOutOfDomain {
            value: t,
            lo: Angle::MIN,
            hi: FRAC_PI_2,
        });
    }
    let p = phi_of_theta(theta, &RootConfig::default())?.phi;
    Ok(derivative_at(t, p))
}

pub(crate) fn derivative_at(theta: f64, phi: f64) -> f64 {
    (phi.sin() - theta.sin()) / ((phi - theta) * phi.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // 40-digit reference values (independent high-precision root solve).
    const PHI_MINUS_ONE: f64 = 2.740_339_007_021_522;
    const PHI_ZERO: f64 = 2.331_122_370_414_422_6;
    const A_MINUS_HALF_PI: f64 = 0.217_233_628_211_221_66;

    fn ang(t: f64) -> Angle {
        Angle::new(t).unwrap()
    }

    #[test]
    fn domain() {
        assert!(Angle::new(PI).is_err());
        assert!(Angle::new(-PI).is_err());
        assert!(Angle::new(f64::NAN).is_err());
        assert!(Angle::new(-PI + 2e-9).is_ok());
    }

    #[test]
    fn x_minus_sin_series_matches_direct() {
        for &x in &[0.999, 0.5, -0.3, 0.1] {
            assert_relative_eq!(x_minus_sin(x), x - f64::sin(x), max_relative = 1e-12);
        }
        assert_relative_eq!(x_minus_sin(1e-5), 1e-15 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn residual_matches_direct_form() {
        for &(t, x) in &[(-1.0, 2.0), (0.3, 2.9), (-2.5, 3.0)] {
            let direct = f64::cos(t) - f64::cos(x) - (x - t) * f64::sin(x);
            assert!((tangency_residual(t, x) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_minus_one_figure_value() {
        let tp = phi_of_theta(ang(-1.0), &RootConfig::default()).unwrap();
        assert!((tp.phi - 2.74).abs() < 0.01);
        assert!((tp.phi - PHI_MINUS_ONE).abs() < 1e-13);
        assert!(tp.residual.abs() <= 1e-12);
        assert!((tp.slope - 0.391).abs() < 0.01);
    }

    #[test]
    fn phi_at_half_pi_is_identity() {
        let tp = phi_of_theta(ang(FRAC_PI_2), &RootConfig::default()).unwrap();
        assert_eq!(tp.phi, FRAC_PI_2);
        assert_eq!(tp.slope, 1.0);
        let t = 3.0 * PI / 4.0;
        assert_relative_eq!(
            a_theta(ang(t)).unwrap(),
            0.5f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn phi_zero_matches_grid_supremum() {
        // 1e7-point grid supremum of (1 - cos x)/x over (0, pi].
        let n = 10_000_000;
        let (mut best_x, mut best) = (0.0, f64::MIN);
        for i in 1..=n {
            let x = PI * i as f64 / n as f64;
            let v = (1.0 - x.cos()) / x;
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let tp = phi_of_theta(ang(0.0), &RootConfig::default()).unwrap();
        assert!((tp.phi - best_x).abs() < 1e-6);
        assert!((tp.slope - best).abs() < 1e-12);
        assert!((tp.phi - PHI_ZERO).abs() < 1e-13);
        assert!((tp.phi - 2.331).abs() < 1e-3);
    }

    #[test]
    fn slope_at_minus_half_pi_matches_grid() {
        let t = -FRAC_PI_2;
        let n = 10_000_000;
        let mut best = f64::MIN;
        for i in 1..=n {
            let x = t + (PI - t) * i as f64 / n as f64;
            best = best.max((t.cos() - x.cos()) / (x - t));
        }
        let a = a_theta(ang(t)).unwrap();
        assert!(a > 0.0 && a < 1.0);
        assert!((a - best).abs() < 1e-12);
        assert!((a - A_MINUS_HALF_PI).abs() < 1e-15);
    }

    #[test]
    fn gap_roots() {
        let th = ang(-1.0);
        assert!(f_theta(th, -1.0).unwrap().abs() < 1e-15);
        let tp = phi_of_theta(th, &RootConfig::default()).unwrap();
        assert!(tp.gap(tp.phi).abs() <= 1e-12);
        let expected = FRAC_PI_2 * PHI_ZERO.sin() - 1.0;
        let got = f_theta(ang(0.0), FRAC_PI_2).unwrap();
        assert!(got > 0.0);
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn derivative_signs_and_fd() {
        let d = dphi_dtheta(ang(-1.0)).unwrap();
        assert!((-1.0..0.0).contains(&d));
        let h = 1e-6;
        let fd = (phi(h).unwrap() - phi(-h).unwrap()) / (2.0 * h);
        assert_relative_eq!(dphi_dtheta(ang(0.0)).unwrap(), fd, max_relative = 1e-4);
    }

    #[test]
    fn derivative_on_identity_branch() {
        assert_eq!(dphi_dtheta(ang(2.0)).unwrap(), 1.0);
        assert!(dphi_dtheta_strict(ang(2.0)).is_err());
        assert!(dphi_dtheta_strict(ang(FRAC_PI_2)).is_err());
    }

    #[test]
    fn near_half_pi_bracket_is_valid() {
        for &u in &[1e-3, 1e-6, 1e-9, 1e-12] {
            let tp = phi_of_theta(ang(FRAC_PI_2 - u), &RootConfig::default()).unwrap();
            assert!(tp.phi >= FRAC_PI_2 && tp.phi <= PI);
            // phi = pi/2 + u/2 + O(u^3)
            let err = (tp.phi - FRAC_PI_2 - 0.5 * u).abs();
            assert!(err < u * u * u + 2e-14, "u = {u}: err {err:e}");
        }
    }

    #[test]
    fn near_minus_pi() {
        let tp = phi_of_theta(ang(-PI + 2e-9), &RootConfig::default()).unwrap();
        assert!(tp.phi > PI - 1e-8 && tp.phi <= PI);
    }

    #[test]
    fn ranges_on_j() {
        for i in 0..=100 {
            let t = -FRAC_PI_2 * i as f64 / 100.0;
            let tp = phi_of_theta(ang(t), &RootConfig::default()).unwrap();
            assert!(tp.ranges_hold(), "theta = {t}");
        }
    }
}
