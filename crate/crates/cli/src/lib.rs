//! Benchmark runner and verification commands for the `brex` library.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod certify;
pub mod check;
pub mod config;
mod error;

pub use config::{BenchConfig, SolverKind};
pub use error::CliError;
