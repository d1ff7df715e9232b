//! Data-fidelity terms, the `l0` objective and its relaxation, and the
//! curvature constants that make the relaxation exact.

mod fidelity;
mod instance;

use ndarray::{Array1, ArrayView1};

pub use fidelity::{fidelity_eval, sigmoid, FidelityEval, FidelityKind};
pub use instance::{ProblemInstance, ZERO_THRESHOLD};

use crate::brex::{BrexComponent, GeneratingFunction};
use crate::error::{invalid, Error, Result};

/// `(F_y(Ax), A^T f'(Ax; y))`. The ridge term is not included.
pub fn residual_gradient(inst: &ProblemInstance, x: ArrayView1<f64>) -> Result<(f64, Array1<f64>)> {
    inst.check_x(x)?;
    let z = inst.a().dot(&x);
    let (value, slope) = inst.fit_value_and_slope(&z)?;
    Ok((value, inst.a().t().dot(&slope)))
}

/// `||x||_0` with entries of magnitude at most [`ZERO_THRESHOLD`] counted as zero.
pub fn support_size(x: ArrayView1<f64>) -> usize {
    x.iter().filter(|v| v.abs() > ZERO_THRESHOLD).count()
}

/// `J0(x) = F_y(Ax) + lambda0 ||x||_0 + (lambda2 / 2) ||x||^2`.
pub fn objective_j0(inst: &ProblemInstance, x: ArrayView1<f64>) -> Result<f64> {
    inst.check_x(x)?;
    let fit = inst.fit_value(&inst.a().dot(&x))?;
    Ok(fit + inst.lambda0() * support_size(x) as f64 + 0.5 * inst.lambda2() * x.dot(&x))
}

/// `J_psi(x) = F_y(Ax) + sum_n beta_n(x_n) + (lambda2 / 2) ||x||^2`.
pub fn objective_jpsi(inst: &ProblemInstance, comps: &[BrexComponent], x: ArrayView1<f64>) -> Result<f64> {
    if comps.len() != inst.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} penalty components for {} features",
            comps.len(),
            inst.n_features()
        )));
    }
    inst.check_x(x)?;
    let fit = inst.fit_value(&inst.a().dot(&x))?;
    Ok(fit + penalty_sum(comps, x) + 0.5 * inst.lambda2() * x.dot(&x))
}

pub(crate) fn penalty_sum(comps: &[BrexComponent], x: ArrayView1<f64>) -> f64 {
    comps.iter().zip(x).map(|(c, &v)| c.value_unchecked(v)).sum()
}

/// Per-coordinate `gamma_n` such that `psi_n = (gamma_n / 2) x^2` dominates the
/// curvature of the smooth part along coordinate `n` over the box, inflated
/// by `1 + margin`.
pub fn gamma_for_exactness(inst: &ProblemInstance, margin: f64) -> Result<Array1<f64>> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(invalid("margin", format!("must be non-negative, got {margin}")));
    }
    let a = inst.a();
    let weights: Array1<f64> = match inst.fidelity() {
        FidelityKind::LeastSquares => Array1::ones(a.nrows()),
        FidelityKind::Logistic => Array1::from_elem(a.nrows(), 0.25),
        FidelityKind::KullbackLeibler { background } => {
            let mut w = Array1::zeros(a.nrows());
            for m in 0..a.nrows() {
                let lo = inst.row_infimum(m) + background;
                if !(lo > 0.0) {
                    return Err(Error::Domain(format!("row {m}: box infimum {lo} is not positive")));
                }
                w[m] = inst.y()[m] / (lo * lo);
            }
            w
        }
    };
    let gamma = a
        .columns()
        .into_iter()
        .map(|col| {
            let curv: f64 = col.iter().zip(&weights).map(|(&c, &w)| c * c * w).sum();
            ((inst.lambda2() + curv) * (1.0 + margin)).max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(gamma)
}

/// Builds quadratic penalty components with the given `gamma_n`.
pub fn quadratic_components(inst: &ProblemInstance, gamma: ArrayView1<f64>) -> Result<Vec<BrexComponent>> {
    if gamma.len() != inst.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} gammas for {} features",
            gamma.len(),
            inst.n_features()
        )));
    }
    gamma
        .iter()
        .map(|&g| BrexComponent::new(GeneratingFunction::quadratic(g)?, inst.lambda0(), inst.bounds()))
        .collect()
}

const POWER_TOL: f64 = 1e-6;
const POWER_MAX_ITER: usize = 1000;
const POWER_INFLATION: f64 = 1.01;

/// Largest eigenvalue of `A^T A`, by power iteration from the normalized
/// all-ones vector.
pub fn spectral_norm_sq(a: &ndarray::Array2<f64>) -> Result<f64> {
    let n = a.ncols();
    let mut v = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = a.t().dot(&a.dot(&v));
        let next = v.dot(&w);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w / norm;
        if (next - est).abs() <= POWER_TOL * next.abs() {
            // norm of A^T A v over a unit v bounds the Rayleigh quotient from above
            return Ok(norm.max(next));
        }
        est = next;
    }
    Err(Error::NotConverged {
        what: "power iteration",
        iterations: POWER_MAX_ITER,
    })
}

/// Lipschitz constant of the gradient of `F_y(A.) + (lambda2 / 2) ||.||^2`
/// over the box.
pub fn lipschitz_bound(inst: &ProblemInstance) -> Result<f64> {
    let curvature = (0..inst.n_samples())
        .map(|m| inst.row_curvature_bound(m))
        .fold(0.0, f64::max);
    let norm_sq = spectral_norm_sq(inst.a())? * POWER_INFLATION;
    Ok((norm_sq * curvature + inst.lambda2()).max(1e-12))
}
