use std::time::Instant;

use ndarray::{Array1, ArrayView1};

use super::fbs::{check_components, finish};
use super::linesearch::{backtrack_linesearch, SmoothPart};
use super::{initial_step, relative_change, SolverOptions, SolverResult};
use crate::brex::{Bounds, BrexComponent};
use crate::error::{invalid, Error, Result};
use crate::objective::{objective_jpsi, ProblemInstance};

/// Majorizing weights `w_n = kappa+_n - psi_n'(|x_n|)` inside `(0, eta+_n)`
/// (the supremum of the subdifferential at zero) and `0` beyond.
pub fn irl1_weights(comps: &[BrexComponent], x: ArrayView1<f64>) -> Result<Array1<f64>> {
    if comps.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} components for {} coordinates",
            comps.len(),
            x.len()
        )));
    }
    comps
        .iter()
        .zip(x)
        .enumerate()
        .map(|(n, (c, &xn))| {
            if !c.is_symmetric() {
                return Err(Error::AsymmetricComponent {
                    index: n,
                    eta_minus: c.eta_minus(),
                    eta_plus: c.eta_plus(),
                    kappa_minus: c.kappa_minus(),
                    kappa_plus: c.kappa_plus(),
                });
            }
            let t = xn.abs();
            Ok(if t < c.eta_plus() {
                (c.kappa_plus() - c.psi().deriv(t)).max(0.0)
            } else {
                0.0
            })
        })
        .collect()
}

/// Prox of `w |.| + (lambda2 / 2) (.)^2` plus the box indicator:
/// soft-threshold, ridge shrink, then clip.
pub fn prox_weighted_l1_ridge_box(w: f64, lambda2: f64, bounds: Bounds, rho: f64, x: f64) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(invalid("w", format!("must be non-negative, got {w}")));
    }
    if !(rho > 0.0) {
        return Err(invalid("rho", format!("must be positive, got {rho}")));
    }
    Ok(weighted_l1_prox(w, lambda2, bounds, rho, x))
}

#[inline]
fn weighted_l1_prox(w: f64, lambda2: f64, bounds: Bounds, rho: f64, x: f64) -> f64 {
    let soft = x.signum() * (x.abs() - rho * w).max(0.0);
    bounds.clip(soft / (1.0 + rho * lambda2))
}

/// Iteratively reweighted `l1` on the relaxed objective.
///
/// Each outer step minimizes `F_y(Ax) + sum_n w_n |x_n| + (lambda2 / 2) ||x||^2`
/// over the box by projected forward-backward iterations, warm-started at the
/// current point.
pub fn irl1_solve(
    inst: &ProblemInstance,
    comps: &[BrexComponent],
    x0: ArrayView1<f64>,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    let start = Instant::now();
    opts.validate()?;
    check_components(inst, comps)?;
    irl1_weights(comps, x0)?;
    let mut x = x0.to_owned();
    let mut jpsi = objective_jpsi(inst, comps, x.view())?;
    let smooth = SmoothPart::DataOnly;
    let mut rho = initial_step(inst, opts, smooth)?;
    let mut final_step = rho;
    let (lambda2, bounds) = (inst.lambda2(), inst.bounds());

    let mut trace = vec![jpsi];
    let mut converged = false;
    let mut outer = 0;

    while outer < opts.outer_max_iter {
        let w = irl1_weights(comps, x.view())?;
        let prox = |n: usize, r: f64, v: f64| weighted_l1_prox(w[n], lambda2, bounds, r, v);
        let surrogate = |s: f64, x: &Array1<f64>| -> f64 {
            s + x.iter().zip(&w).map(|(v, wn)| wn * v.abs()).sum::<f64>() + 0.5 * lambda2 * x.dot(x)
        };

        let mut inner_x = x.clone();
        let (mut s, mut grad, _) = smooth.value_and_grad(inst, inner_x.view())?;
        let mut sur = surrogate(s, &inner_x);
        for _ in 0..opts.inner_max_iter {
            let step = backtrack_linesearch(inst, smooth, inner_x.view(), grad.view(), s, rho, prox, opts)?;
            let sur_next = surrogate(step.smooth, &step.x);
            if sur_next > sur {
                break;
            }
            let change = relative_change(inner_x.view(), step.x.view());
            final_step = step.rho;
            rho = step.rho * opts.backtrack_grow;
            inner_x = step.x;
            sur = sur_next;
            if change < opts.inner_rel_tol {
                break;
            }
            let (fit, slope) = inst.fit_value_and_slope(&step.z)?;
            s = fit;
            grad = inst.a().t().dot(&slope);
        }

        let next = objective_jpsi(inst, comps, inner_x.view())?;
        let change = relative_change(x.view(), inner_x.view());
        if next > jpsi {
            converged = true;
            break;
        }
        outer += 1;
        x = inner_x;
        jpsi = next;
        trace.push(jpsi);
        if change < opts.rel_tol {
            converged = true;
            break;
        }
    }

    finish(
        inst,
        comps,
        x,
        outer,
        converged,
        trace,
        start,
        opts.polish_enabled,
        final_step,
    )
}
