//! Margolus-Levitin speed limit: the function `alpha(eps)` in
//! `tau >= pi hbar alpha(eps) / (2 <E - E0>)`, the states that attain it, and
//! brute-force checks of the bound.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod error;
pub mod oracle;
pub mod rootfind;
pub mod saturate;
pub mod sentinel;
pub mod tangency;

pub use alpha::{Fidelity, Method};
pub use error::{QslError, Result};
pub use rootfind::{RootConfig, RootStatus};
