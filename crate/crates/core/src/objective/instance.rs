use ndarray::{Array1, Array2, ArrayView1};

use super::fidelity::{sigmoid, softplus, FidelityKind};
use crate::brex::Bounds;
use crate::error::{invalid, Error, Result};

/// Entries with magnitude at or below this count as zero in `||x||_0`.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// A validated instance of the box-constrained `l0` problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: Array2<f64>,
    y: Array1<f64>,
    fidelity: FidelityKind,
    lambda0: f64,
    lambda2: f64,
    bounds: Bounds,
}

impl ProblemInstance {
    /// Builds and validates an instance. Logistic labels may be given in
    /// `{-1, 1}` or `{0, 1}`; they are stored as `{0, 1}`.
    pub fn new(
        a: Array2<f64>,
        y: Array1<f64>,
        fidelity: FidelityKind,
        lambda0: f64,
        lambda2: f64,
        bounds: Bounds,
    ) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} rows but y has {} entries",
                a.nrows(),
                y.len()
            )));
        }
        if a.ncols() == 0 {
            return Err(Error::DimensionMismatch("A has no columns".into()));
        }
        if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("data", "A and y must be finite"));
        }
        let y = match fidelity {
            FidelityKind::LeastSquares => y,
            FidelityKind::Logistic => {
                let mut enc = y;
                for v in enc.iter_mut() {
                    *v = match *v {
                        1.0 => 1.0,
                        x if x == 0.0 || x == -1.0 => 0.0,
                        x => return Err(invalid("y", format!("logistic label {x} not in {{-1, 0, 1}}"))),
                    };
                }
                enc
            }
            FidelityKind::KullbackLeibler { background } => {
                if !(background > 0.0 && background.is_finite()) {
                    return Err(invalid("background", format!("must be positive, got {background}")));
                }
                if y.iter().any(|&v| v < 0.0) {
                    return Err(invalid("y", "Kullback-Leibler observations must be non-negative"));
                }
                y
            }
        };
        let inst = Self {
            a,
            y,
            fidelity,
            lambda0: 1.0,
            lambda2: 0.0,
            bounds,
        };
        if let FidelityKind::KullbackLeibler { background } = fidelity {
            for m in 0..inst.a.nrows() {
                let lo = inst.row_infimum(m) + background;
                if !(lo > 0.0) {
                    return Err(Error::Domain(format!(
                        "row {m}: min over the box of <a_m, x> + b is {lo}, must be positive"
                    )));
                }
            }
        }
        inst.with_regularization(lambda0, lambda2)
    }

    /// Replaces `lambda0` and `lambda2`.
    pub fn with_regularization(mut self, lambda0: f64, lambda2: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(invalid("lambda0", format!("must be positive, got {lambda0}")));
        }
        if !(lambda2 >= 0.0 && lambda2.is_finite()) {
            return Err(invalid("lambda2", format!("must be non-negative, got {lambda2}")));
        }
        self.lambda0 = lambda0;
        self.lambda2 = lambda2;
        Ok(self)
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }
    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }
    pub fn fidelity(&self) -> FidelityKind {
        self.fidelity
    }
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    pub fn n_samples(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_features(&self) -> usize {
        self.a.ncols()
    }

    /// `F_y(0)`.
    pub fn zero_fit(&self) -> f64 {
        let z = Array1::zeros(self.n_samples());
        self.fit_value(&z).expect("z = 0 is in the domain of every fidelity")
    }

    /// Smallest value of `<a_m, x>` over the box (interval arithmetic).
    pub fn row_infimum(&self, m: usize) -> f64 {
        let (l, u) = (self.bounds.lower(), self.bounds.upper());
        self.a
            .row(m)
            .iter()
            .map(|&a| {
                if a > 0.0 {
                    a * l
                } else if a < 0.0 {
                    a * u
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Upper bound of `f''` over the box for row `m`.
    pub fn row_curvature_bound(&self, m: usize) -> f64 {
        match self.fidelity {
            FidelityKind::LeastSquares => 1.0,
            FidelityKind::Logistic => 0.25,
            FidelityKind::KullbackLeibler { background } => {
                let w = self.row_infimum(m) + background;
                self.y[m] / (w * w)
            }
        }
    }

    pub(crate) fn check_x(&self, x: ArrayView1<f64>) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} entries, expected {}",
                x.len(),
                self.n_features()
            )));
        }
        for &v in x.iter() {
            self.bounds.check(v)?;
        }
        Ok(())
    }

    /// `sum_m f(z_m; y_m)`.
    pub(crate) fn fit_value(&self, z: &Array1<f64>) -> Result<f64> {
        let mut total = 0.0;
        match self.fidelity {
            FidelityKind::LeastSquares => {
                for (&zm, &ym) in z.iter().zip(&self.y) {
                    let r = zm - ym;
                    total += 0.5 * r * r;
                }
            }
            FidelityKind::Logistic => {
                for (&zm, &ym) in z.iter().zip(&self.y) {
                    total += softplus(zm) - ym * zm;
                }
            }
            kind @ FidelityKind::KullbackLeibler { .. } => {
                for (&zm, &ym) in z.iter().zip(&self.y) {
                    total += kind.value(zm, ym)?;
                }
            }
        }
        Ok(total)
    }

    /// `(F_y(z), f'(z_m; y_m))`.
    pub(crate) fn fit_value_and_slope(&self, z: &Array1<f64>) -> Result<(f64, Array1<f64>)> {
        let mut slope = Array1::zeros(z.len());
        let mut total = 0.0;
        match self.fidelity {
            FidelityKind::LeastSquares => {
                for ((s, &zm), &ym) in slope.iter_mut().zip(z).zip(&self.y) {
                    let r = zm - ym;
                    total += 0.5 * r * r;
                    *s = r;
                }
            }
            FidelityKind::Logistic => {
                for ((s, &zm), &ym) in slope.iter_mut().zip(z).zip(&self.y) {
                    total += softplus(zm) - ym * zm;
                    *s = sigmoid(zm) - ym;
                }
            }
            kind @ FidelityKind::KullbackLeibler { .. } => {
                for ((s, &zm), &ym) in slope.iter_mut().zip(z).zip(&self.y) {
                    let e = kind.eval(zm, ym)?;
                    total += e.value;
                    *s = e.deriv;
                }
            }
        }
        Ok((total, slope))
    }
}
