//! Accelerated first-order methods for weakly-quasi-convex and
//! weakly-quasi-strongly-convex objectives.
//!
//! - [`objective`]: oracles, the quadratic and nonconvex test objectives,
//!   finite-difference gradients.
//! - [`classcheck`]: sampled membership checks and constant estimation.
//! - [`linesearch`]: golden-section search on a segment.
//! - [`gd`]: gradient descent with class-specific stepsizes.
//! - [`wes`]: the accelerated method built on weak estimate sequences.
//! - [`oqa`]: optimal quadratic averaging.
//! - [`lqr`]: LQR policy optimization as a test objective.
//! - [`harness`]: experiment configs and envelope reports.
//! - [`bench`]: the deterministic benchmark suite.

pub mod bench;
pub mod catalogue;
pub mod classcheck;
pub mod error;
pub mod gd;
pub mod harness;
pub mod linesearch;
pub mod lqr;
pub mod objective;
pub mod oqa;
pub mod params;
#[cfg(test)]
mod properties;
pub mod sampling;
pub mod trajectory;
pub mod wes;

pub use error::{Error, Result};
pub use objective::{Matrix, Oracle, Point};
pub use params::ClassParams;
pub use trajectory::Trajectory;
