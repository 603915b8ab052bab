//! Recovery of a sparse mixing matrix from second moments.
//!
//! Observations follow `X = A·S + N` where `S` has uncorrelated unit-variance
//! components and `N` is independent diagonal noise, so the covariance is
//! `Σ = A·Aᵀ + D`. When `A` is sparse and generic the columns of `A` can be
//! identified (up to order and sign) from `Σ` alone, even for Gaussian
//! sources: each column leaves a rank-one fully-dense block on its support,
//! and the entrywise ratio of two covariance rows is constant exactly on
//! that block. The recovery loop extracts one column at a time from a pivot
//! pair of rows (mode of the row ratios, then per-row medians), verifies it
//! by a residual-sparsity test, and deflates.
//!
//! The crate is generic over the scalar type through [`Real`]; `f64` aliases
//! for the main types are exported at the root.
//!
//! Modules:
//! - [`model`]: instance generation (Bernoulli-Gaussian ensembles, data,
//!   population and empirical covariances) with deterministic seeded streams
//! - [`structure`]: support combinatorics of a known `A` — overlap sets,
//!   the overlap condition, collinearity capacity, good pivot pairs
//! - [`recovery`]: the column-extraction procedures and the deflation driver
//! - [`metrics`]: permutation/sign-invariant distance between column sets
//! - [`concentration`]: binomial/Wishart tail bounds and sample-size planning

pub mod concentration;
mod error;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod real;
pub mod recovery;
pub mod rng;
pub mod structure;

pub use error::{Error, Result};
pub use real::Real;

/// Dense matrix over `f64`.
pub type Matrix64 = matrix::Matrix<f64>;
/// Mixing matrix over `f64`.
pub type MixingMatrix64 = model::MixingMatrix<f64>;
/// Covariance input over `f64`.
pub type Covariance64 = model::CovarianceInput<f64>;
/// Procedure parameters over `f64`.
pub type ScipParams64 = recovery::ScipParams<f64>;
/// Recovery output over `f64`.
pub type RecoveryResult64 = recovery::RecoveryResult<f64>;
