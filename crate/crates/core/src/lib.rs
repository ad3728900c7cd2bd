//! Simulation and analysis of time-bin qubit generation by parametric
//! interaction of two slow single-photon pulses in a driven EIT medium.
//!
//! The crate is organised bottom-up:
//!
//! * [`medium`] turns SI experimental parameters into the dimensionless
//!   simulation frame and checks the regime of validity.
//! * [`pulse`] holds sampled complex envelopes, the photon-number measure and
//!   cubic-spline resampling.
//! * [`kernel`] evaluates the analytic Bessel-kernel solution of the lossless
//!   transport equations.
//! * [`oracle`] integrates the same equations directly (semi-Lagrangian) and is
//!   used to cross-check the kernel.
//! * [`analysis`] extracts the fast/slow time-bin modes and evaluates the
//!   entanglement entropy, Wigner function and Banaszek-Wodkiewicz combination.
//! * [`cli`] parses job configurations and writes CSV/summary outputs.
//!
//! Time is measured in units of the input pulse duration `T` and distance in
//! units of the medium length `L` throughout the simulation frame.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
mod error;
pub mod kernel;
pub mod medium;
pub mod oracle;
pub mod pulse;

pub use error::{Error, Result};
