//! Numerical laboratory for log-correlated Gaussian free fields on the torus
//! `T^d`, their Wick-renormalized quartic interaction, and Monte Carlo
//! estimates of truncated focusing Gibbs partition functions with a
//! renormalized `L^2` cutoff.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: lattices, field sampling, projections, grids.
//! - [`wick`]: Hermite polynomials, Wick integrals, chaos moment formulas.
//! - [`estimator`]: mergeable accumulators and partition-function estimators.
//! - [`drift`]: the bump profile `f_M`, deterministic drift and the
//!   variational lower bound.
//! - [`scan`]: coupling schedules, regime scans and classification.
//! - [`config`], [`output`], [`verify`]: the command-line surface.

pub mod config;
pub mod drift;
pub mod error;
pub mod estimator;
pub mod output;
pub mod rng;
pub mod scan;
pub mod spectral;
pub mod verify;
pub mod wick;

pub use error::{Error, Result};
