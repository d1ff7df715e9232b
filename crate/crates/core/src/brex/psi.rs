//! Strictly convex generating functions for the Bregman divergence.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};

/// Domain of a generating function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiDomain {
    Real,
    NonNegative,
}

impl PsiDomain {
    pub fn contains(self, x: f64) -> bool {
        match self {
            PsiDomain::Real => x.is_finite(),
            PsiDomain::NonNegative => x.is_finite() && x >= 0.0,
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user supplied generating function given by its value and first two
/// derivatives.
#[derive(Clone)]
pub struct CustomPsi {
    value: ScalarFn,
    deriv: ScalarFn,
    second_deriv: ScalarFn,
    domain: PsiDomain,
}

impl CustomPsi {
    pub fn new<V, D, S>(value: V, deriv: D, second_deriv: S, domain: PsiDomain) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            second_deriv: Arc::new(second_deriv),
            domain,
        }
    }
}

impl fmt::Debug for CustomPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPsi")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// One-dimensional strictly convex function `psi` defining `d_psi(x, z)`.
#[derive(Debug, Clone)]
pub enum GeneratingFunction {
    /// `psi(x) = (gamma / 2) x^2`.
    Quadratic {
        gamma: f64,
    },
    Custom(CustomPsi),
}

impl GeneratingFunction {
    pub fn quadratic(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be positive and finite, got {gamma}")));
        }
        Ok(GeneratingFunction::Quadratic { gamma })
    }

    pub fn custom(psi: CustomPsi) -> Self {
        GeneratingFunction::Custom(psi)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            GeneratingFunction::Quadratic { gamma } => 0.5 * gamma * x * x,
            GeneratingFunction::Custom(c) => (c.value)(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            GeneratingFunction::Quadratic { gamma } => gamma * x,
            GeneratingFunction::Custom(c) => (c.deriv)(x),
        }
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        match self {
            GeneratingFunction::Quadratic { gamma } => *gamma,
            GeneratingFunction::Custom(c) => (c.second_deriv)(x),
        }
    }

    pub fn domain(&self) -> PsiDomain {
        match self {
            GeneratingFunction::Quadratic { .. } => PsiDomain::Real,
            GeneratingFunction::Custom(c) => c.domain,
        }
    }

    /// Bregman divergence `d_psi(x, z) = psi(x) - psi(z) - psi'(z) (x - z)`.
    pub fn bregman(&self, x: f64, z: f64) -> f64 {
        self.value(x) - self.value(z) - self.deriv(z) * (x - z)
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            GeneratingFunction::Quadratic { gamma } => Some(*gamma),
            GeneratingFunction::Custom(_) => None,
        }
    }
}
