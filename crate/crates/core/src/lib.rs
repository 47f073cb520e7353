//! Lattice approximation of stochastic heat equations reflected at zero.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: the discrete Dirichlet Laplacian `n^2 A^n`, its sine
//!   eigenbasis, semigroup, heat kernels and piecewise-linear fields.
//! - [`skorohod`]: the deterministic reflection problem
//!   `dZ = n^2 A^n Z dt + d eta`, `Z >= -V`, with a projected and a
//!   penalized backend.
//! - [`obstacle`]: the parabolic obstacle problem solved through the lattice
//!   reflection problem, with weak-form and convergence diagnostics.
//! - [`noise`]: counter-based Brownian sheet increments and their coupled
//!   coarsening to lattice drivers.
//! - [`spde`]: the reflected lattice SDE system, its mild-form residual and
//!   Monte Carlo estimators.
//! - [`harness`]: JSON-configured experiments producing CSV tables and run
//!   manifests, used by the `rspde` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod lattice;
pub mod noise;
pub mod obstacle;
mod quadrature;
pub mod skorohod;
pub mod spde;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{
    DiscreteLaplacian, GridSpec, KernelTruncation, PiecewiseLinearField, SampledPath, SpectralBasis,
};
