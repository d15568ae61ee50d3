//! Harmonic analysis on homogeneous groups, numerically.
//!
//! The crate provides homogeneous groups with diagonal dilations, invariant
//! derivatives and Taylor polynomials, kernels with certified vanishing
//! moments, a direct group-convolution engine, Littlewood-Paley square
//! functions, Peetre, Hardy-Littlewood and grand maximal functions, and
//! Calderon-type reproducing pairs, together with an experiment harness that
//! measures the constants in the associated inequalities.

pub mod calculus;
pub mod conv;
pub mod error;
pub mod grid;
pub mod harness;
pub mod group;
pub mod kernels;
pub mod numeric;
pub mod reproducing;

pub use error::{Error, Result};
pub use grid::{GridSpec, SampledFunction};
pub use group::{GroupSpec, Point};
