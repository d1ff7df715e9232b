use ndarray::{Array1, ArrayView1};

use super::SolverOptions;
use crate::error::{Error, Result};
use crate::objective::ProblemInstance;

const MAX_HALVINGS: usize = 60;

/// Which terms make up the smooth part of a splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothPart {
    /// `F_y(Ax) + (lambda2 / 2) ||x||^2`.
    WithRidge,
    /// `F_y(Ax)` alone; the ridge lives in the prox.
    DataOnly,
}

impl SmoothPart {
    pub fn eval(self, inst: &ProblemInstance, x: ArrayView1<f64>, z: &Array1<f64>) -> Result<f64> {
        let fit = inst.fit_value(z)?;
        Ok(match self {
            SmoothPart::WithRidge => fit + 0.5 * inst.lambda2() * x.dot(&x),
            SmoothPart::DataOnly => fit,
        })
    }

    /// Smooth value and gradient at `x`.
    pub fn value_and_grad(self, inst: &ProblemInstance, x: ArrayView1<f64>) -> Result<(f64, Array1<f64>, Array1<f64>)> {
        let z = inst.a().dot(&x);
        let (fit, slope) = inst.fit_value_and_slope(&z)?;
        let mut grad = inst.a().t().dot(&slope);
        let value = match self {
            SmoothPart::WithRidge => {
                grad.scaled_add(inst.lambda2(), &x);
                fit + 0.5 * inst.lambda2() * x.dot(&x)
            }
            SmoothPart::DataOnly => fit,
        };
        Ok((value, grad, z))
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchStep {
    pub x: Array1<f64>,
    /// Step actually used.
    pub rho: f64,
    /// Smooth part at `x`.
    pub smooth: f64,
    /// `A x`.
    pub z: Array1<f64>,
    pub halvings: usize,
}

/// Forward-backward step with backtracking on the sufficient-decrease test
///
/// ```text
/// S(x+) <= S(x) + <grad, x+ - x> + ||x+ - x||^2 / (2 rho)
/// ```
///
/// `prox(n, rho, v)` is the per-coordinate prox of the nonsmooth part.
#[allow(clippy::too_many_arguments)]
pub fn backtrack_linesearch<P>(
    inst: &ProblemInstance,
    smooth: SmoothPart,
    x: ArrayView1<f64>,
    grad: ArrayView1<f64>,
    smooth_at_x: f64,
    rho: f64,
    prox: P,
    opts: &SolverOptions,
) -> Result<LineSearchStep>
where
    P: Fn(usize, f64, f64) -> f64,
{
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(crate::error::invalid("rho", format!("must be positive, got {rho}")));
    }
    // rounding slack on the comparison only
    let slack = 8.0 * f64::EPSILON * smooth_at_x.abs().max(1.0);
    let mut rho = rho;
    for halvings in 0..=MAX_HALVINGS {
        let x_next: Array1<f64> = x
            .iter()
            .zip(grad)
            .enumerate()
            .map(|(n, (&xn, &gn))| prox(n, rho, xn - rho * gn))
            .collect();
        let z = inst.a().dot(&x_next);
        let s_next = smooth.eval(inst, x_next.view(), &z)?;
        let mut lin = 0.0;
        let mut quad = 0.0;
        for ((&a, &b), &g) in x_next.iter().zip(x).zip(grad) {
            let d = a - b;
            lin += g * d;
            quad += d * d;
        }
        if s_next <= smooth_at_x + lin + quad / (2.0 * rho) + slack {
            return Ok(LineSearchStep {
                x: x_next,
                rho,
                smooth: s_next,
                z,
                halvings,
            });
        }
        rho *= opts.backtrack_shrink;
    }
    Err(Error::StepUnderflow { halvings: MAX_HALVINGS })
}
