//! Simulation harness, file formats and command-line front end for
//! [`matseg_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlogram;
pub mod error;
pub mod format;
pub mod simulation;

pub use error::{Error, Result};
