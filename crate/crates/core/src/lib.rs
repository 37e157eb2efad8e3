//! Numerical laboratory for fractional Brownian motion with `1/2 < H < 1`:
//! path generation, weighted local time, Young integration against local
//! time, the weighted quadratic covariation, and Monte Carlo checks of the
//! associated stochastic-calculus identities.

pub mod covariation;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod harness;
pub mod hurst;
pub mod integration;
pub mod local_time;
pub mod quadrature;
pub mod rng;

pub use error::{FracError, Result};
pub use grid::TimeGrid;
pub use hurst::HurstIndex;
