use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separable data-fidelity `F_y(z) = sum_m f(z_m; y_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FidelityKind {
    LeastSquares,
    /// Labels encoded in `{0, 1}`.
    Logistic,
    /// `f(z; y) = (z + b) - y + y log(y / (z + b))`.
    KullbackLeibler {
        background: f64,
    },
}

/// Value, first and second derivative of `f(.; y)` at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEval {
    pub value: f64,
    pub deriv: f64,
    pub second_deriv: f64,
}

/// Overflow-safe `log(1 + e^z)`.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl FidelityKind {
    pub fn eval(&self, z: f64, y: f64) -> Result<FidelityEval> {
        match *self {
            FidelityKind::LeastSquares => {
                let r = z - y;
                Ok(FidelityEval {
                    value: 0.5 * r * r,
                    deriv: r,
                    second_deriv: 1.0,
                })
            }
            FidelityKind::Logistic => {
                let s = sigmoid(z);
                Ok(FidelityEval {
                    value: softplus(z) - y * z,
                    deriv: s - y,
                    second_deriv: s * (1.0 - s),
                })
            }
            FidelityKind::KullbackLeibler { background } => {
                let w = z + background;
                if !(w > 0.0) {
                    return Err(Error::Domain(format!(
                        "Kullback-Leibler needs z + b > 0, got z = {z}, b = {background}"
                    )));
                }
                let value = if y == 0.0 { w } else { w - y + y * (y / w).ln() };
                Ok(FidelityEval {
                    value,
                    deriv: 1.0 - y / w,
                    second_deriv: y / (w * w),
                })
            }
        }
    }

    pub fn value(&self, z: f64, y: f64) -> Result<f64> {
        Ok(self.eval(z, y)?.value)
    }
}

/// `fidelity_eval` in function form.
pub fn fidelity_eval(kind: FidelityKind, z: f64, y: f64) -> Result<FidelityEval> {
    kind.eval(z, y)
}
