//! Numerical laboratory for exceedances of convex combinations of
//! near-Gaussian vectors.
//!
//! The crate maps a vector to its empirical coordinate measure and ordering
//! permutation, measures 1-D Wasserstein distances to the standard Gaussian,
//! builds permutation and box-product couplings, and sandwiches the maximal
//! exceedance `S_k = sup P(lambda_1 Z_1 + ... + lambda_k Z_k >= 1)` between
//! dual-certificate upper bounds and box-product lower bounds.

// Guards are written as `!(x > a)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod couplings;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod measures;
pub mod sampling;

pub use error::{Error, Result};
