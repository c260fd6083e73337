//! Performance analysis of a two-user interference channel whose receivers
//! each carry a planar fluid antenna (a single RF chain that can switch
//! among `N` correlated ports) and decode both messages jointly.
//!
//! The crate is layered bottom-up:
//!
//! - [`special`]: scalar special functions (normal CDF/quantile, bivariate
//!   normal CDF, the spatial correlation kernel).
//! - [`geometry`]: port grids and their spatial correlation matrices.
//! - [`marginals`]: per-port exponential and hypoexponential laws.
//! - [`copula`]: distribution of the best port under a Gaussian copula,
//!   backed by a quasi-Monte Carlo multivariate normal integrator.
//! - [`metrics`]: closed-form outage probability, delay outage rate and
//!   ergodic capacity, plus their high-SNR forms.
//! - [`montecarlo`]: correlated-channel simulation used to cross-check
//!   every closed form.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
pub mod error;
pub mod geometry;
pub mod marginals;
pub mod metrics;
pub mod montecarlo;
pub mod special;

pub use error::{Error, Result};

/// Converts a decibel value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
