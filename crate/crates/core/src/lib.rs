//! Certified prime-in-interval estimates.
//!
//! Given a threshold `x0`, this crate verifies (or searches for) the largest
//! interval-shrink factor `Delta` such that a positivity condition built from
//! explicit zeta-zero sums proves a prime in `(x(1 - 1/Delta), x]` for all
//! `x >= x0`. All analytic quantities are evaluated in directed-rounding
//! interval arithmetic, so a positive certified margin is rigorous at the
//! stated working precision.

pub mod certify;
pub mod constants;
pub mod error;
pub mod estimates;
pub mod interval;
pub mod manifest;
pub mod optimize;
pub mod quad;
pub mod smoothing;
pub mod zeros;

pub use constants::{AnalyticConstants, ResolvedConstants};
pub use error::{Error, Result};
pub use interval::{Interval, Prec};

/// Default working precision in bits.
pub const DEFAULT_PREC: Prec = 256;
