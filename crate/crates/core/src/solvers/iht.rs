use std::time::Instant;

use ndarray::ArrayView1;

use super::linesearch::{backtrack_linesearch, SmoothPart};
use super::{initial_step, relative_change, SolverOptions, SolverResult};
use crate::brex::Bounds;
use crate::error::{invalid, Result};
use crate::objective::{objective_j0, support_size, ProblemInstance};

/// `argmin_{v in [l, u]} (v - x)^2 / 2 + rho lambda0 |v|_0 + (rho lambda2 / 2) v^2`,
/// ties going to zero.
pub fn prox_l0_ridge_box(lambda0: f64, lambda2: f64, bounds: Bounds, rho: f64, x: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(invalid("rho", format!("must be positive, got {rho}")));
    }
    Ok(l0_prox(lambda0, lambda2, bounds, rho, x))
}

#[inline]
fn l0_prox(lambda0: f64, lambda2: f64, bounds: Bounds, rho: f64, x: f64) -> f64 {
    let v = bounds.clip(x / (1.0 + rho * lambda2));
    if v == 0.0 {
        return 0.0;
    }
    let keep = 0.5 * (v - x) * (v - x) + rho * lambda0 + 0.5 * rho * lambda2 * v * v;
    let drop = 0.5 * x * x;
    if keep < drop {
        v
    } else {
        0.0
    }
}

/// Iterative hard thresholding with backtracking on the original `J0`.
pub fn iht_solve(inst: &ProblemInstance, x0: ArrayView1<f64>, opts: &SolverOptions) -> Result<SolverResult> {
    let start = Instant::now();
    opts.validate()?;
    let mut x = x0.to_owned();
    let mut j0 = objective_j0(inst, x.view())?;
    // the ridge is handled exactly by the prox
    let smooth = SmoothPart::DataOnly;
    let mut rho = initial_step(inst, opts, smooth)?;
    let mut final_step = rho;
    let (s0, g0, _) = smooth.value_and_grad(inst, x.view())?;
    let (mut s, mut grad) = (s0, g0);
    let (lambda0, lambda2, bounds) = (inst.lambda0(), inst.lambda2(), inst.bounds());
    let prox = |_: usize, r: f64, v: f64| l0_prox(lambda0, lambda2, bounds, r, v);

    let mut trace = vec![j0];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let step = backtrack_linesearch(inst, smooth, x.view(), grad.view(), s, rho, prox, opts)?;
        let next = step.smooth + lambda0 * support_size(step.x.view()) as f64 + 0.5 * lambda2 * step.x.dot(&step.x);
        let change = relative_change(x.view(), step.x.view());
        if next > j0 {
            converged = true;
            break;
        }
        iterations += 1;
        final_step = step.rho;
        x = step.x;
        j0 = next;
        trace.push(j0);
        if change < opts.rel_tol {
            converged = true;
            break;
        }
        let (fit, slope) = inst.fit_value_and_slope(&step.z)?;
        s = fit;
        grad = inst.a().t().dot(&slope);
        rho = step.rho * opts.backtrack_grow;
    }

    Ok(SolverResult {
        j0_final: objective_j0(inst, x.view())?,
        jpsi_final: None,
        x_hat: x,
        iterations,
        converged,
        objective_trace: trace,
        wall_time: start.elapsed(),
        polished: false,
        final_step,
    })
}
