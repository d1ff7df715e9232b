//! Exact continuous relaxations of box-constrained `l0`-regularized problems.
//!
//! The `l0` term of
//!
//! ```text
//! J0(x) = F_y(Ax) + lambda0 ||x||_0 + (lambda2 / 2) ||x||^2,   x in [l, u]^N
//! ```
//!
//! is replaced by a separable Bregman penalty `B(x) = sum_n beta_n(x_n)` with
//! closed-form value and prox. With the curvature of each `psi_n` dominating
//! the data term along coordinate lines, the relaxed objective keeps the
//! global minimizers of `J0` and drops some of its local ones.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brex;
pub mod datagen;
pub mod error;
pub mod objective;
pub mod oracle;
pub mod solvers;

pub use brex::{compute_breakpoints, prox_beta, Bounds, BrexComponent, GeneratingFunction};
pub use error::{Error, Result};
pub use objective::{FidelityKind, ProblemInstance};
pub use oracle::{exhaustive_global, OracleResult};
pub use solvers::{fbs_solve, iht_solve, irl1_solve, polish, SolverOptions, SolverResult};
