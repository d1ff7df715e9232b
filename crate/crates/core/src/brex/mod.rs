//! Box-constrained Bregman relaxation of the `l0` penalty.

mod component;
mod oracle;
mod prox;
mod psi;

pub use component::{compute_breakpoints, Bounds, BreakpointOptions, BrexComponent, Subgradient};
pub use oracle::{beta_oracle, prox_beta_oracle, BetaOracle};
pub use prox::{prox_beta, prox_objective};
pub use psi::{CustomPsi, GeneratingFunction, PsiDomain};

pub(crate) use prox::prox_beta_unchecked;
