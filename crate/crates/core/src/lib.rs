//! Segmentation of matrix-valued (and tensor-valued) time series.
//!
//! Given observations `Y_1, ..., Y_n` of a `p x q` matrix, this crate looks
//! for an orthogonal `q x q` transformation after which the columns split
//! into groups that are uncorrelated with each other at every lag. The
//! pipeline is:
//!
//! 1. standardize the series so that its row covariance is the identity
//!    ([`segmentation::standardize`]);
//! 2. take the eigenvectors of the lagged W statistic
//!    ([`estimators::w_stat`], [`segmentation::estimate_gamma`]);
//! 3. score every pair of transformed columns by their maximum cross
//!    correlation, choose the number of connected pairs with the ratio rule
//!    and group columns by connected components ([`segmentation::segment`]).
//!
//! Hard-thresholded estimators and cross-validated threshold selection
//! ([`threshold_cv`]) handle the high-dimensional case, and [`tensor`]
//! applies the procedure sequentially along every mode of a tensor series.
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats, simulation
//! and the command-line tool live in the `matseg` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod linalg;
pub mod matrix;
pub mod segmentation;
pub mod series;
pub mod tensor;
pub mod threshold_cv;
mod union_find;

pub use error::{Error, Result};
pub use linalg::{Basis, SymMatrix};
pub use matrix::Matrix;
pub use segmentation::{segment, SegmentationConfig, SegmentationResult, Statistic, ThresholdMode};
pub use series::MatrixSeries;
pub use tensor::{sequential_segment, TensorSeries};
