use thiserror::Error;

/// Errors raised by argument validation across the crate.
///
/// Numerical non-convergence is not an error: solvers report it through
/// [`crate::rootfind::RootStatus`] so callers can inspect the last iterate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("fidelity must lie in [0, 1], got {0}")]
    InvalidFidelity(f64),

    #[error("angle {value} outside supported domain ({lo}, {hi})")]
    AngleOutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("f(lo) = {f_lo} and f(hi) = {f_hi} do not bracket a root")]
    NotBracketing { f_lo: f64, f_hi: f64 },

    #[error("initial guess {x0} lies outside bracket [{lo}, {hi}]")]
    GuessOutsideBracket { x0: f64, lo: f64, hi: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("fidelity {0} is not supported by this operation")]
    UnsupportedFidelity(f64),
}

pub type Result<T> = std::result::Result<T, QslError>;
