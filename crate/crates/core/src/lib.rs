//! A desk-scale laboratory for `s_n`, the sum of initial-longest-increasing-
//! sequence lengths over the canonical cycles of a uniform random permutation.
//!
//! Four independent routes to the law of `s_n` live here and check one another:
//!
//! * [`enumerate`]: exhaustive enumeration of `S_n` for small `n`;
//! * [`series`]: coefficient extraction from the generating function
//!   `H(x, y) = Σ E(y^{s_n}) x^n`;
//! * [`asymptotics`]: the leading singularity-analysis term and the moment
//!   generating function of `(s_n - e ln n)/sqrt(3 e ln n)`;
//! * [`montecarlo`]: seeded simulation with a Kolmogorov–Smirnov comparison
//!   against the standard normal.

pub mod asymptotics;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod manifest;
pub mod montecarlo;
pub mod perm;
pub mod series;
pub mod verify;

pub use error::{LabError, Result};

/// Formats a real with 17 significant digits, which round-trips any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
