//! Per-coordinate box-constrained Bregman penalty: breakpoints, value and
//! subdifferential.

use serde::{Deserialize, Serialize};

use super::psi::{GeneratingFunction, PsiDomain};
use crate::error::{invalid, Error, Result};

/// Componentwise bounds `[lower, upper]` with `lower <= 0 <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: f64,
    upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        let ok = !lower.is_nan()
            && !upper.is_nan()
            && lower <= 0.0
            && upper >= 0.0
            && lower < upper
            && lower != f64::INFINITY
            && upper != f64::NEG_INFINITY;
        if ok {
            Ok(Self { lower, upper })
        } else {
            Err(Error::InvalidBox { lower, upper })
        }
    }

    pub fn symmetric(radius: f64) -> Result<Self> {
        Self::new(-radius, radius)
    }

    pub fn unbounded() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }

    pub(crate) fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfBox {
                value: x,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }
}

/// Closed interval returned by [`BrexComponent::subgradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subgradient {
    pub lo: f64,
    pub hi: f64,
}

impl Subgradient {
    fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn hull(a: f64, b: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Controls for the bisection used with non-quadratic generating functions.
#[derive(Debug, Clone, Copy)]
pub struct BreakpointOptions {
    /// Largest `|z|` tried while bracketing `d(0, z) = lambda0`.
    pub horizon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BreakpointOptions {
    fn default() -> Self {
        Self {
            horizon: 1e8,
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// One coordinate of the penalty. The parameters fully determine `beta` in
/// closed form.
#[derive(Debug, Clone)]
pub struct BrexComponent {
    lambda0: f64,
    bounds: Bounds,
    alpha_minus: f64,
    alpha_plus: f64,
    eta_minus: f64,
    eta_plus: f64,
    kappa_minus: f64,
    kappa_plus: f64,
    psi: GeneratingFunction,
    psi_at_zero: f64,
}

/// Computes the breakpoints of `beta` for `psi`, `lambda0` and the box.
pub fn compute_breakpoints(psi: GeneratingFunction, lambda0: f64, bounds: Bounds) -> Result<BrexComponent> {
    BrexComponent::with_options(psi, lambda0, bounds, BreakpointOptions::default())
}

impl BrexComponent {
    pub fn new(psi: GeneratingFunction, lambda0: f64, bounds: Bounds) -> Result<Self> {
        compute_breakpoints(psi, lambda0, bounds)
    }

    pub fn quadratic(gamma: f64, lambda0: f64, bounds: Bounds) -> Result<Self> {
        compute_breakpoints(GeneratingFunction::quadratic(gamma)?, lambda0, bounds)
    }

    pub fn with_options(
        psi: GeneratingFunction,
        lambda0: f64,
        bounds: Bounds,
        opts: BreakpointOptions,
    ) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(invalid("lambda0", format!("must be positive, got {lambda0}")));
        }
        if let GeneratingFunction::Quadratic { gamma } = psi {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(invalid("gamma", format!("must be positive, got {gamma}")));
            }
        }
        if psi.domain() == PsiDomain::NonNegative && bounds.lower() < 0.0 {
            return Err(Error::Domain(format!(
                "box lower bound {} lies outside the non-negative domain of psi",
                bounds.lower()
            )));
        }

        let (alpha_minus, alpha_plus) = match psi {
            GeneratingFunction::Quadratic { gamma } => {
                let a = (2.0 * lambda0 / gamma).sqrt();
                (-a, a)
            }
            GeneratingFunction::Custom(_) => {
                let plus = bisect_sublevel(&psi, lambda0, 1.0, &opts)?;
                let minus = match psi.domain() {
                    PsiDomain::Real => bisect_sublevel(&psi, lambda0, -1.0, &opts)?,
                    PsiDomain::NonNegative => 0.0,
                };
                (minus, plus)
            }
        };

        let psi0 = psi.value(0.0);
        let l = bounds.lower();
        let u = bounds.upper();

        let (eta_plus, kappa_plus) = if u == 0.0 {
            (0.0, 0.0)
        } else if alpha_plus <= u {
            (alpha_plus, psi.deriv(alpha_plus))
        } else {
            (u, (lambda0 + psi.value(u) - psi0) / u)
        };
        let (eta_minus, kappa_minus) = if l == 0.0 {
            (0.0, 0.0)
        } else if alpha_minus >= l {
            (alpha_minus, psi.deriv(alpha_minus))
        } else {
            (l, (lambda0 + psi.value(l) - psi0) / l)
        };

        Ok(Self {
            lambda0,
            bounds,
            alpha_minus,
            alpha_plus,
            eta_minus,
            eta_plus,
            kappa_minus,
            kappa_plus,
            psi,
            psi_at_zero: psi0,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    pub fn alpha_minus(&self) -> f64 {
        self.alpha_minus
    }
    pub fn alpha_plus(&self) -> f64 {
        self.alpha_plus
    }
    pub fn eta_minus(&self) -> f64 {
        self.eta_minus
    }
    pub fn eta_plus(&self) -> f64 {
        self.eta_plus
    }
    pub fn kappa_minus(&self) -> f64 {
        self.kappa_minus
    }
    pub fn kappa_plus(&self) -> f64 {
        self.kappa_plus
    }
    pub fn psi(&self) -> &GeneratingFunction {
        &self.psi
    }

    /// True when `x` lies in `(eta-, 0) U (0, eta+)`, where `beta` is strictly
    /// below `lambda0`.
    pub fn in_concave_region(&self, x: f64) -> bool {
        (x > 0.0 && x < self.eta_plus) || (x < 0.0 && x > self.eta_minus)
    }

    /// `beta(x)`; fails when `x` is outside the box.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.bounds.check(x)?;
        Ok(self.value_unchecked(x))
    }

    /// `beta(x)` without the box check.
    #[inline]
    pub fn value_unchecked(&self, x: f64) -> f64 {
        if x > 0.0 {
            if x < self.eta_plus {
                self.psi_at_zero - self.psi.value(x) + self.kappa_plus * x
            } else {
                self.lambda0
            }
        } else if x < 0.0 {
            if x > self.eta_minus {
                self.psi_at_zero - self.psi.value(x) + self.kappa_minus * x
            } else {
                self.lambda0
            }
        } else {
            0.0
        }
    }

    /// Subdifferential of `beta` at `x`.
    pub fn subgradient(&self, x: f64) -> Result<Subgradient> {
        self.bounds.check(x)?;
        let branch = |kappa: f64, t: f64| kappa - self.psi.deriv(t);
        let g = if x == 0.0 {
            let d0 = self.psi.deriv(0.0);
            Subgradient::hull(self.kappa_minus - d0, self.kappa_plus - d0)
        } else if x > 0.0 {
            if x < self.eta_plus {
                Subgradient::point(branch(self.kappa_plus, x))
            } else if x == self.eta_plus {
                let left = branch(self.kappa_plus, x);
                if self.eta_plus < self.bounds.upper() {
                    Subgradient::hull(left, 0.0)
                } else {
                    Subgradient::point(left)
                }
            } else {
                Subgradient::point(0.0)
            }
        } else if x > self.eta_minus {
            Subgradient::point(branch(self.kappa_minus, x))
        } else if x == self.eta_minus {
            let right = branch(self.kappa_minus, x);
            if self.eta_minus > self.bounds.lower() {
                Subgradient::hull(right, 0.0)
            } else {
                Subgradient::point(right)
            }
        } else {
            Subgradient::point(0.0)
        };
        Ok(g)
    }

    /// `beta(x) = beta(-x)` on the box, up to a relative tolerance.
    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-12 * (1.0 + self.eta_plus.abs().max(self.kappa_plus.abs()));
        self.psi.domain() == PsiDomain::Real
            && (self.eta_minus + self.eta_plus).abs() <= tol
            && (self.kappa_minus + self.kappa_plus).abs() <= tol
    }
}

/// Solves `d(0, z) = lambda0` on the side of zero given by `sign`.
fn bisect_sublevel(psi: &GeneratingFunction, lambda0: f64, sign: f64, opts: &BreakpointOptions) -> Result<f64> {
    let defect = |t: f64| psi.bregman(0.0, sign * t) - lambda0;
    let mut hi = 1.0;
    loop {
        let d = defect(hi);
        if d.is_nan() {
            return Err(Error::BracketNotFound {
                lambda0,
                horizon: opts.horizon,
            });
        }
        if d >= 0.0 {
            break;
        }
        hi *= 2.0;
        if hi > opts.horizon {
            return Err(Error::BracketNotFound {
                lambda0,
                horizon: opts.horizon,
            });
        }
    }
    let mut lo = 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..opts.max_iter {
        mid = 0.5 * (lo + hi);
        let d = defect(mid);
        if d.abs() <= opts.tol {
            break;
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * mid)
}
