use std::time::Instant;

use ndarray::{Array1, ArrayView1};

use super::linesearch::{backtrack_linesearch, SmoothPart};
use super::{initial_step, polish, relative_change, SolverOptions, SolverResult};
use crate::brex::{prox_beta_unchecked, BrexComponent};
use crate::error::{Error, Result};
use crate::objective::{objective_j0, objective_jpsi, penalty_sum, ProblemInstance};

/// Forward-backward splitting on the relaxed objective `J_psi`.
///
/// The ridge is part of the gradient step; the prox is the per-coordinate
/// closed form of `rho * beta_n` on the box.
pub fn fbs_solve(
    inst: &ProblemInstance,
    comps: &[BrexComponent],
    x0: ArrayView1<f64>,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    let start = Instant::now();
    opts.validate()?;
    check_components(inst, comps)?;
    let mut x = x0.to_owned();
    let mut jpsi = objective_jpsi(inst, comps, x.view())?;
    let smooth = SmoothPart::WithRidge;
    let mut rho = initial_step(inst, opts, smooth)?;
    let mut final_step = rho;
    let (mut s, mut grad, _) = smooth.value_and_grad(inst, x.view())?;

    let mut trace = vec![jpsi];
    let mut converged = false;
    let mut iterations = 0;
    let prox = |n: usize, r: f64, v: f64| prox_beta_unchecked(&comps[n], r, v);

    while iterations < opts.max_iter {
        let step = backtrack_linesearch(inst, smooth, x.view(), grad.view(), s, rho, prox, opts)?;
        let next = step.smooth + penalty_sum(comps, step.x.view());
        let change = relative_change(x.view(), step.x.view());
        if next > jpsi {
            // only reachable through rounding: no further descent is possible
            converged = true;
            break;
        }
        iterations += 1;
        final_step = step.rho;
        x = step.x;
        jpsi = next;
        trace.push(jpsi);
        if change < opts.rel_tol {
            converged = true;
            break;
        }
        let (fit, slope) = inst.fit_value_and_slope(&step.z)?;
        grad = inst.a().t().dot(&slope);
        grad.scaled_add(inst.lambda2(), &x);
        s = fit + 0.5 * inst.lambda2() * x.dot(&x);
        rho = step.rho * opts.backtrack_grow;
    }

    finish(
        inst,
        comps,
        x,
        iterations,
        converged,
        trace,
        start,
        opts.polish_enabled,
        final_step,
    )
}

pub(super) fn check_components(inst: &ProblemInstance, comps: &[BrexComponent]) -> Result<()> {
    if comps.len() != inst.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} penalty components for {} features",
            comps.len(),
            inst.n_features()
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub(super) fn finish(
    inst: &ProblemInstance,
    comps: &[BrexComponent],
    x: Array1<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    start: Instant,
    polish_enabled: bool,
    final_step: f64,
) -> Result<SolverResult> {
    let x_hat = if polish_enabled {
        polish(inst, comps, x.view())?
    } else {
        x
    };
    Ok(SolverResult {
        j0_final: objective_j0(inst, x_hat.view())?,
        jpsi_final: Some(objective_jpsi(inst, comps, x_hat.view())?),
        x_hat,
        iterations,
        converged,
        objective_trace: trace,
        wall_time: start.elapsed(),
        polished: polish_enabled,
        final_step,
    })
}
