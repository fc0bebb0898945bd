//! Leakage-rate analysis for artificial-noise-assisted massive MIMO downlinks.
//!
//! The crate is `no_std` (with `alloc`) and covers the numerical side of the
//! problem: complex linear algebra, special functions and manifold volumes,
//! channel and signal synthesis, seeded Monte Carlo estimators, closed-form
//! leakage bounds and secrecy rates, and the coherence-time planner.
//!
//! Parallel execution, configuration files, CSV output and the command line
//! live in the `anam` companion crate, which plugs a thread pool into
//! [`montecarlo::TrialRunner`].
//!
//! All internal logarithms are natural. Conversion to bits happens where a
//! rate is reported, which is in [`bounds`] and in the rate-valued
//! estimators of [`montecarlo`].

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod channel;
mod error;
pub mod linalg;
pub mod montecarlo;
pub mod planner;
pub mod special;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;

/// log₂(e), used to turn nats into bits.
pub const LOG2_E: f64 = core::f64::consts::LOG2_E;
