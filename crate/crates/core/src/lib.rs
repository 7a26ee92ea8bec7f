//! Moments of weighted sums of independent exponential and gamma variables.
//!
//! The crate computes `𝔼|Σ x_j 𝓔_j − m|^p` by several independent engines
//! (exact rational, closed-form density, Fourier inversion, Monte Carlo),
//! and builds on them verification suites for sharp moment comparisons,
//! Schur-monotonicity scans and the associated constant solvers.

pub mod analysis;
pub mod engines;
pub mod error;
pub mod model;
pub mod par;
pub mod quadrature;
pub mod schur;
pub mod specialfn;

pub use error::{Error, Result};
pub use par::ExecMode;
