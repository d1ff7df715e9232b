//! Proximal operator of `rho * beta` restricted to the box.
//!
//! The minimizer lies in the finite candidate set `{l, 0, x, u, eta-, eta+}`
//! together with the stationary points of each smooth branch, i.e. the roots
//! of `v - rho psi'(v) = x - rho kappa` inside that branch.

use super::component::BrexComponent;
use super::psi::GeneratingFunction;
use crate::error::{invalid, Result};

const ROOT_SCAN_SEGMENTS: usize = 128;

/// `argmin_{v in [l, u]} beta(v) + (v - x)^2 / (2 rho)`.
///
/// Ties go to the candidate of smallest magnitude.
pub fn prox_beta(comp: &BrexComponent, rho: f64, x: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", format!("must be positive, got {rho}")));
    }
    Ok(prox_beta_unchecked(comp, rho, x))
}

/// Value of the prox objective at `v`.
#[inline]
pub fn prox_objective(comp: &BrexComponent, rho: f64, x: f64, v: f64) -> f64 {
    let d = v - x;
    comp.value_unchecked(v) + d * d / (2.0 * rho)
}

pub(crate) fn prox_beta_unchecked(comp: &BrexComponent, rho: f64, x: f64) -> f64 {
    let bounds = comp.bounds();
    let mut best = Best::new();
    let mut consider = |v: f64| {
        if v.is_finite() && bounds.contains(v) {
            best.offer(v, prox_objective(comp, rho, x, v));
        }
    };

    consider(0.0);
    consider(x);
    consider(bounds.lower());
    consider(bounds.upper());
    consider(comp.eta_minus());
    consider(comp.eta_plus());

    let (neg, pos) = (comp.eta_minus(), comp.eta_plus());
    match comp.psi() {
        GeneratingFunction::Quadratic { gamma } => {
            let denom = 1.0 - rho * gamma;
            if denom != 0.0 {
                let vp = (x - rho * comp.kappa_plus()) / denom;
                if vp > 0.0 && vp < pos {
                    consider(vp);
                }
                let vm = (x - rho * comp.kappa_minus()) / denom;
                if vm < 0.0 && vm > neg {
                    consider(vm);
                }
            }
        }
        psi @ GeneratingFunction::Custom(_) => {
            let h_plus = |v: f64| v - rho * psi.deriv(v) - (x - rho * comp.kappa_plus());
            let h_minus = |v: f64| v - rho * psi.deriv(v) - (x - rho * comp.kappa_minus());
            if pos > 0.0 {
                scan_roots(h_plus, 0.0, pos, &mut consider);
            }
            if neg < 0.0 {
                scan_roots(h_minus, neg, 0.0, &mut consider);
            }
        }
    }
    best.value()
}

struct Best {
    v: f64,
    obj: f64,
}

impl Best {
    fn new() -> Self {
        Self {
            v: 0.0,
            obj: f64::INFINITY,
        }
    }

    fn offer(&mut self, v: f64, obj: f64) {
        if obj < self.obj || (obj == self.obj && v.abs() < self.v.abs()) {
            self.v = v;
            self.obj = obj;
        }
    }

    fn value(&self) -> f64 {
        self.v
    }
}

/// Roots of `h` in the open interval `(a, b)`, found by sign-change scanning
/// followed by bisection.
fn scan_roots<H, F>(h: H, a: f64, b: f64, sink: &mut F)
where
    H: Fn(f64) -> f64,
    F: FnMut(f64),
{
    let width = b - a;
    let at = |i: usize| a + width * (i as f64) / (ROOT_SCAN_SEGMENTS as f64);
    // open interval: nudge the scan off the endpoints
    let eps = width * 1e-12;
    let mut left = a + eps;
    let mut h_left = h(left);
    for i in 1..=ROOT_SCAN_SEGMENTS {
        let right = if i == ROOT_SCAN_SEGMENTS { b - eps } else { at(i) };
        let h_right = h(right);
        if h_left == 0.0 {
            sink(left);
        } else if h_left.is_finite() && h_right.is_finite() && h_left * h_right < 0.0 {
            let (mut lo, mut hi, mut f_lo) = (left, right, h_left);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let f_mid = h(mid);
                if f_mid == 0.0 || hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (f_mid < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            sink(0.5 * (lo + hi));
        }
        left = right;
        h_left = h_right;
    }
}
