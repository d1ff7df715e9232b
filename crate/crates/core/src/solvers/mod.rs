//! First-order solvers for the relaxed and original objectives.

mod fbs;
mod iht;
mod irl1;
mod linesearch;
mod polish;

use std::time::Duration;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

pub use fbs::fbs_solve;
pub use iht::{iht_solve, prox_l0_ridge_box};
pub use irl1::{irl1_solve, irl1_weights, prox_weighted_l1_ridge_box};
pub use linesearch::{backtrack_linesearch, LineSearchStep, SmoothPart};
pub use polish::polish;

use crate::error::{invalid, Result};
use crate::objective::{lipschitz_bound, FidelityKind, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop when `||x+ - x|| / max(||x||, 1e-12)` falls below this.
    pub rel_tol: f64,
    /// Initial step; `None` uses `1 / L`.
    pub step_init: Option<f64>,
    pub backtrack_shrink: f64,
    pub backtrack_grow: f64,
    pub inner_max_iter: usize,
    pub inner_rel_tol: f64,
    pub outer_max_iter: usize,
    pub polish_enabled: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            rel_tol: 1e-7,
            step_init: None,
            backtrack_shrink: 0.5,
            backtrack_grow: 1.1,
            inner_max_iter: 500,
            inner_rel_tol: 1e-8,
            outer_max_iter: 200,
            polish_enabled: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.inner_max_iter == 0 || self.outer_max_iter == 0 {
            return Err(invalid("max_iter", "iteration limits must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol", format!("must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.inner_rel_tol > 0.0 && self.inner_rel_tol < 1.0) {
            return Err(invalid("inner_rel_tol", "must lie in (0, 1)"));
        }
        if let Some(s) = self.step_init {
            if !(s > 0.0 && s.is_finite()) {
                return Err(invalid("step_init", format!("must be positive, got {s}")));
            }
        }
        if !(self.backtrack_shrink > 0.0 && self.backtrack_shrink < 1.0) {
            return Err(invalid("backtrack_shrink", "must lie in (0, 1)"));
        }
        if !(self.backtrack_grow >= 1.0 && self.backtrack_grow.is_finite()) {
            return Err(invalid("backtrack_grow", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x_hat: Array1<f64>,
    pub j0_final: f64,
    /// Relaxed objective at `x_hat`; `None` for solvers working on `J0`.
    pub jpsi_final: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `J_psi` per iterate for the relaxation solvers, `J0` for IHT.
    pub objective_trace: Vec<f64>,
    pub wall_time: Duration,
    pub polished: bool,
    /// Step size used for the last accepted iteration.
    pub final_step: f64,
}

pub(crate) fn relative_change(prev: ArrayView1<f64>, next: ArrayView1<f64>) -> f64 {
    let diff: f64 = prev.iter().zip(next).map(|(a, b)| (a - b) * (a - b)).sum();
    diff.sqrt() / prev.dot(&prev).sqrt().max(1e-12)
}

pub(crate) fn initial_step(inst: &ProblemInstance, opts: &SolverOptions, smooth: SmoothPart) -> Result<f64> {
    if let Some(s) = opts.step_init {
        return Ok(s);
    }
    let mut l = lipschitz_bound(inst)?;
    if smooth == SmoothPart::DataOnly {
        l -= inst.lambda2();
    }
    Ok(1.0 / l.max(1e-12))
}

/// `A^T y` clipped to the box, with logistic labels mapped back to `{-1, 1}`.
pub fn correlation_start(inst: &ProblemInstance) -> Array1<f64> {
    let y = match inst.fidelity() {
        FidelityKind::Logistic => inst.y().mapv(|v| 2.0 * v - 1.0),
        _ => inst.y().clone(),
    };
    let b = inst.bounds();
    inst.a().t().dot(&y).mapv(|v| b.clip(v))
}
