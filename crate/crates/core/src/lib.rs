//! Constrained and well-conditioned linear minimum-mean-square-error filters.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense symmetric/SVD kernels, SPD solves, condition numbers.
//! - [`model`]: the joint covariance model and synthetic generators.
//! - [`filters`]: Wiener, Wiener-structured, LRW, CSW, JPC, LSJPC and the
//!   weighted variants, each carrying an audited largest-solve dimension.
//! - [`diagnostics`]: analytic MSE, weighted/determinant objectives,
//!   truncation-power loss, scaling studies and the L line search.
//! - [`dataio`]: CSV ingestion, windowing, train/test split, result files.
//! - [`harness`]: the sweeps driven by the `wclmmse` binary.

pub mod dataio;
pub mod diagnostics;
mod error;
pub mod filters;
pub mod harness;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Mat = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type Vector = nalgebra::DVector<f64>;
