//! Brute-force grid oracles for the penalty and its prox. Used by tests and
//! the `check` battery; they never call into the closed forms they verify,
//! except where noted.

use super::component::{Bounds, BrexComponent};
use super::prox::prox_objective;
use super::psi::{GeneratingFunction, PsiDomain};
use crate::error::{invalid, Error, Result};

const CORE_MARGIN: f64 = 1.0;
const FAR_LIMIT: f64 = 1e7;

/// Literal evaluation of the penalty as a double sup/inf over grids.
///
/// For each grid point `z`, `alpha(z) = inf_{x'} lambda0 |x'|_0 + d(x', z)`
/// over box grid points `x'`; then `beta(x) = max_z alpha(z) - d(x, z)`.
/// The table of `alpha(z)` is independent of `x` and is built once.
#[derive(Debug, Clone)]
pub struct BetaOracle {
    psi: GeneratingFunction,
    z: Vec<f64>,
    alpha: Vec<f64>,
}

impl BetaOracle {
    pub fn new(psi: GeneratingFunction, lambda0: f64, bounds: Bounds, grid_step: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(invalid("lambda0", "must be positive"));
        }
        if !(grid_step > 0.0 && grid_step.is_finite()) {
            return Err(Error::EmptyGrid);
        }
        let nonneg = psi.domain() == PsiDomain::NonNegative;

        let (a_lo, a_hi) = sublevel_extent(&psi, lambda0, nonneg);
        let core_lo = if nonneg {
            0.0
        } else {
            bounds.lower().max(f64::MIN).min(a_lo) - CORE_MARGIN
        };
        let core_hi = bounds.upper().min(f64::MAX).max(a_hi) + CORE_MARGIN;
        let core_lo = core_lo.max(a_lo - CORE_MARGIN - 10.0);
        let core_hi = core_hi.min(a_hi + CORE_MARGIN + 10.0);

        // x' grid over the box (clipped to the core range when unbounded)
        let x_lo = bounds.lower().max(core_lo);
        let x_hi = bounds.upper().min(core_hi);
        let mut xs = uniform(x_lo, x_hi, grid_step);
        xs.push(0.0);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let nonzero: Vec<f64> = xs.iter().copied().filter(|&t| t != 0.0).collect();

        let alpha_at = |z: f64| -> f64 {
            let at_zero = psi.bregman(0.0, z);
            let mut best = at_zero;
            // d(., z) is convex with minimum at z: only the grid neighbours of z
            // can attain the grid minimum over nonzero points.
            if !nonzero.is_empty() {
                let k = nonzero.partition_point(|&t| t < z);
                for j in [k.wrapping_sub(1), k] {
                    if let Some(&t) = nonzero.get(j) {
                        best = best.min(lambda0 + psi.bregman(t, z));
                    }
                }
            }
            best
        };
        let zero_branch_wins = |z: f64| psi.bregman(0.0, z) <= alpha_at(z);

        let mut z = uniform(core_lo, core_hi, grid_step);
        // far region: alpha(z) may keep following d(0, z) well beyond the box
        // when the box is narrow; extend geometrically until it switches.
        let rel = grid_step / 10.0;
        if let Some(end) = far_end(core_hi, 1.0, &zero_branch_wins) {
            geometric(core_hi, end, rel, &mut z);
        }
        if !nonneg {
            if let Some(end) = far_end(-core_lo, -1.0, &|t| zero_branch_wins(t)) {
                let mut neg = Vec::new();
                geometric(-core_lo, end, rel, &mut neg);
                z.extend(neg.into_iter().map(|t| -t));
            }
        }
        z.retain(|&t| psi.domain().contains(t));
        if z.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let alpha = z.iter().map(|&t| alpha_at(t)).collect();
        Ok(Self { psi, z, alpha })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.z
            .iter()
            .zip(&self.alpha)
            .map(|(&z, &a)| a - self.psi.bregman(x, z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn grid_len(&self) -> usize {
        self.z.len()
    }
}

/// One-shot form of [`BetaOracle`].
pub fn beta_oracle(psi: GeneratingFunction, lambda0: f64, bounds: Bounds, x: f64, grid_step: f64) -> Result<f64> {
    bounds.check(x)?;
    Ok(BetaOracle::new(psi, lambda0, bounds, grid_step)?.eval(x))
}

/// Grid argmin of `beta(v) + (v - x)^2 / (2 rho)` over the box clipped to
/// `[x - 10, x + 10]`. Uses the closed-form `beta`.
pub fn prox_beta_oracle(comp: &BrexComponent, rho: f64, x: f64, grid_step: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(invalid("rho", "must be positive"));
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::EmptyGrid);
    }
    let b = comp.bounds();
    let lo = b.lower().max(x - 10.0);
    let hi = b.upper().min(x + 10.0);
    if lo > hi {
        // x far outside the box: the window misses it, fall back to the nearest end
        let v = b.clip(x);
        return Ok(v);
    }
    let mut best = (f64::INFINITY, 0.0_f64);
    for v in uniform(lo, hi, grid_step) {
        let obj = prox_objective(comp, rho, x, v);
        if obj < best.0 || (obj == best.0 && v.abs() < best.1.abs()) {
            best = (obj, v);
        }
    }
    if best.0.is_infinite() {
        return Err(Error::EmptyGrid);
    }
    Ok(best.1)
}

fn uniform(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(lo <= hi) {
        return Vec::new();
    }
    let n = ((hi - lo) / step).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();
    if *v.last().unwrap() < hi {
        v.push(hi);
    }
    v
}

fn geometric(start: f64, end: f64, rel: f64, out: &mut Vec<f64>) {
    let mut t = start.max(1e-3);
    while t < end {
        t *= 1.0 + rel;
        out.push(t);
    }
}

/// Smallest doubling of `start` (towards `sign`) at which `alpha(z)` leaves
/// the `d(0, z)` branch, times two; `None` if it never does within range.
fn far_end(start: f64, sign: f64, zero_branch_wins: &dyn Fn(f64) -> bool) -> Option<f64> {
    let mut t = start.max(1.0);
    while t <= FAR_LIMIT {
        if !zero_branch_wins(sign * t) {
            return if t > start { Some(2.0 * t) } else { None };
        }
        t *= 2.0;
    }
    None
}

/// Rough extent of `{z : d(0, z) <= lambda0}` found by doubling.
fn sublevel_extent(psi: &GeneratingFunction, lambda0: f64, nonneg: bool) -> (f64, f64) {
    let reach = |sign: f64| {
        let mut t = 1e-3;
        while t < FAR_LIMIT && psi.bregman(0.0, sign * t) < lambda0 {
            t *= 2.0;
        }
        sign * t
    };
    let lo = if nonneg { 0.0 } else { reach(-1.0) };
    (lo, reach(1.0))
}
