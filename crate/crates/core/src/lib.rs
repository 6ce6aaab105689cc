//! Renormalized Birkhoff sums of the singular observable
//! `phi(x) = x^{-a} - 1/(1-a)` over circle rotations, and the lattice
//! functional whose law they converge to.
//!
//! The crate is organised bottom-up:
//!
//! * [`observable`]: `phi`, its capped version and direct Birkhoff sums.
//! * [`rotation`]: signed fractional parts and the resonant index sets.
//! * [`fourier`]: oscillatory coefficients, per-frequency terms and the
//!   Fourier model sums, including the endpoint-corrected reconstruction.
//! * [`lattice`]: unimodular planar lattices, Gauss reduction, Haar and
//!   geodesic samplers, and the frequency/lattice-vector correspondence.
//! * [`limit_dist`]: the oscillating-term functional at finite `N` and in
//!   the limit, and Monte Carlo estimators of its law.
//! * [`stats`]: empirical CDFs, Kolmogorov-Smirnov distances and Monte
//!   Carlo estimates with confidence intervals.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fourier;
pub mod lattice;
pub mod limit_dist;
pub mod numerics;
pub mod observable;
pub mod params;
pub mod rng;
pub mod rotation;
pub mod stats;

pub use params::Params;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("observable evaluated at the singular point 0 (orbit index {index:?})")]
    SingularHit { index: Option<u64> },

    #[error("orbit point {index} sits on a breakpoint of the capped observable")]
    OnBreakpoint { index: u64 },

    #[error("vanishing denominator at frequency k = {k}")]
    SmallDenominator { k: u64 },

    #[error("lattice is not unimodular: |det - 1| = {0:e}")]
    NotUnimodular(f64),

    #[error("integer overflow in lattice arithmetic")]
    Overflow,

    #[error("lattice reduction did not converge")]
    NoConvergence,

    #[error("frame carries no rotation-lattice provenance")]
    MissingProvenance,

    #[error("correspondence failed at k = {k}: {reason}")]
    Correspondence { k: u64, reason: String },

    #[error("insufficient samples: {usable} usable out of {requested}")]
    InsufficientSamples { usable: usize, requested: usize },

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;
