use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid box [{lower}, {upper}]: require lower <= 0 <= upper and lower < upper")]
    InvalidBox { lower: f64, upper: f64 },

    #[error("value {value} lies outside the box [{lower}, {upper}]")]
    OutOfBox { value: f64, lower: f64, upper: f64 },

    #[error("no bisection bracket for d(0, z) = {lambda0} within |z| <= {horizon}")]
    BracketNotFound { lambda0: f64, horizon: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("backtracking step underflow after {halvings} halvings")]
    StepUnderflow { halvings: usize },

    #[error(
        "component {index} is not symmetric (eta = [{eta_minus}, {eta_plus}], kappa = [{kappa_minus}, {kappa_plus}])"
    )]
    AsymmetricComponent {
        index: usize,
        eta_minus: f64,
        eta_plus: f64,
        kappa_minus: f64,
        kappa_plus: f64,
    },

    #[error("support enumeration of {count} candidates exceeds the guard of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("empty grid")]
    EmptyGrid,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
