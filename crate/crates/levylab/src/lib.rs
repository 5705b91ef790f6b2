//! Verification laboratory for local times of symmetric stable Lévy processes
//! and their mixtures.
//!
//! The crate computes the analytic side (transition densities, spectral
//! constants, exact occupation moments) by quadrature, simulates paths of the
//! same processes, estimates local-time fields from the paths, and runs Monte
//! Carlo experiments that confront the two sides: the centered, rescaled L²
//! modulus of the local time against its mixed-Gaussian limit law.

// Argument guards are written `!(x > 0.0)` on purpose: the negation rejects
// NaN, which `x <= 0.0` silently accepts.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod density;
pub mod error;
pub mod exponent;
pub mod harness;
pub mod kac;
pub mod localtime;
pub mod quad;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
