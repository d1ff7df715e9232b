//! Synthetic sparse-recovery instances: correlated Gaussian designs,
//! equispaced sparse ground truths, Gaussian noise at a prescribed SNR and
//! Bernoulli logistic labels.
//!
//! All randomness comes from one seed. Each kind of draw (design, signal,
//! noise, labels) uses its own ChaCha20 stream, so e.g. changing the SNR does
//! not change the design.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::brex::Bounds;
use crate::error::{invalid, Result};
use crate::objective::{FidelityKind, ProblemInstance};

/// Identifies the generator in output metadata.
pub const PRNG_NAME: &str = "ChaCha20Rng::seed_from_u64 (rand_chacha 0.3); streams design=1 signal=2 noise=3 labels=4";

const STREAM_DESIGN: u64 = 1;
const STREAM_SIGNAL: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_LABELS: u64 = 4;

/// Nonzero entries of a least-squares ground truth avoid `(-GAP, GAP)`.
pub const SIGNAL_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataFidelity {
    /// Least squares with Gaussian noise at signal-to-noise ratio `snr`.
    Ls { snr: f64 },
    /// Logistic labels with inverse temperature `s`.
    Lr { s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub m: usize,
    pub n: usize,
    pub k_star: usize,
    pub corr_rho: f64,
    pub fidelity: DataFidelity,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn bounds(&self) -> Result<Bounds> {
        Bounds::new(self.lower, self.upper)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(invalid("dimensions", "M and N must be positive"));
        }
        if self.k_star == 0 || self.k_star > self.n {
            return Err(invalid(
                "k_star",
                format!("must lie in 1..={}, got {}", self.n, self.k_star),
            ));
        }
        check_rho(self.corr_rho)?;
        self.bounds()?;
        match self.fidelity {
            DataFidelity::Ls { snr } if !(snr > 0.0) => Err(invalid("snr", format!("must be positive, got {snr}"))),
            DataFidelity::Lr { s } if !(s > 0.0) => Err(invalid("s", format!("must be positive, got {s}"))),
            _ => Ok(()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..1.0).contains(&rho) {
        Ok(())
    } else {
        Err(invalid("corr_rho", format!("must lie in [0, 1), got {rho}")))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// `M x N` design with i.i.d. rows `N(0, Sigma)`, `Sigma_ij = rho^|i-j|`,
/// realized by the AR(1) recursion along each row.
pub fn gen_design(m: usize, n: usize, corr_rho: f64, seed: u64) -> Result<Array2<f64>> {
    check_rho(corr_rho)?;
    let mut rng = stream(seed, STREAM_DESIGN);
    let innov = (1.0 - corr_rho * corr_rho).sqrt();
    let mut a = Array2::zeros((m, n));
    for mut row in a.rows_mut() {
        let mut prev: f64 = 0.0;
        for (j, v) in row.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            prev = if j == 0 { z } else { corr_rho * prev + innov * z };
            *v = prev;
        }
    }
    Ok(a)
}

/// Equispaced support `round(i N / k)` for `i = 0..k`, collisions shifted right.
pub fn support_indices(n: usize, k: usize) -> Vec<usize> {
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(k);
    for i in 0..k.min(n) {
        let mut idx = ((i * n) as f64 / k as f64).round() as usize;
        idx = idx.min(n - 1);
        while taken[idx] {
            idx = (idx + 1) % n;
        }
        taken[idx] = true;
        out.push(idx);
    }
    out
}

/// `x^T Sigma x` for the exponential correlation matrix.
pub fn exp_corr_quadratic_form(x: &Array1<f64>, corr_rho: f64) -> f64 {
    let nz: Vec<(usize, f64)> = x.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
    let mut total = 0.0;
    for &(i, xi) in &nz {
        for &(j, xj) in &nz {
            total += xi * xj * corr_rho.powi(i.abs_diff(j) as i32);
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct LsDataset {
    /// Regularization placeholders `lambda0 = 1, lambda2 = 0`; set them with
    /// [`ProblemInstance::with_regularization`].
    pub instance: ProblemInstance,
    pub x_star: Array1<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct LrDataset {
    /// Regularization placeholders as for [`LsDataset`].
    pub instance: ProblemInstance,
    pub x_star: Array1<f64>,
    /// Labels in `{-1, 1}` as drawn; the instance stores them as `{0, 1}`.
    pub raw_labels: Array1<f64>,
}

pub fn gen_ls_instance(spec: &DatasetSpec) -> Result<LsDataset> {
    spec.validate()?;
    let DataFidelity::Ls { snr } = spec.fidelity else {
        return Err(invalid("fidelity", "gen_ls_instance needs a least-squares dataset"));
    };
    let bounds = spec.bounds()?;
    if !bounds.is_finite() {
        return Err(invalid(
            "box",
            "least-squares signals are drawn uniformly from a finite box",
        ));
    }
    let (l, u) = (bounds.lower(), bounds.upper());
    if u - l <= 2.0 * SIGNAL_GAP {
        return Err(invalid("box", "box too narrow for the signal gap"));
    }

    let a = gen_design(spec.m, spec.n, spec.corr_rho, spec.seed)?;
    let mut signal_rng = stream(spec.seed, STREAM_SIGNAL);
    let mut x_star = Array1::zeros(spec.n);
    for idx in support_indices(spec.n, spec.k_star) {
        x_star[idx] = loop {
            let v = signal_rng.gen_range(l..=u);
            if v.abs() >= SIGNAL_GAP {
                break v;
            }
        };
    }
    let energy = exp_corr_quadratic_form(&x_star, spec.corr_rho);
    if !(energy > 0.0) {
        return Err(invalid("x_star", "ground truth has zero energy"));
    }
    let sigma = (energy / snr).sqrt();

    let mut noise_rng = stream(spec.seed, STREAM_NOISE);
    let mut y = a.dot(&x_star);
    for v in y.iter_mut() {
        let e: f64 = noise_rng.sample(StandardNormal);
        *v += sigma * e;
    }
    let instance = ProblemInstance::new(a, y, FidelityKind::LeastSquares, 1.0, 0.0, bounds)?;
    Ok(LsDataset {
        instance,
        x_star,
        sigma,
    })
}

pub fn gen_lr_instance(spec: &DatasetSpec) -> Result<LrDataset> {
    spec.validate()?;
    let DataFidelity::Lr { s } = spec.fidelity else {
        return Err(invalid("fidelity", "gen_lr_instance needs a logistic dataset"));
    };
    let bounds = spec.bounds()?;
    if bounds.upper() < 1.0 {
        return Err(invalid(
            "box",
            "logistic ground truth has unit entries; upper bound must be >= 1",
        ));
    }
    let a = gen_design(spec.m, spec.n, spec.corr_rho, spec.seed)?;
    let mut x_star = Array1::zeros(spec.n);
    for idx in support_indices(spec.n, spec.k_star) {
        x_star[idx] = 1.0;
    }
    let margin = a.dot(&x_star);
    let mut rng = stream(spec.seed, STREAM_LABELS);
    let raw_labels: Array1<f64> = margin
        .iter()
        .map(|&t| {
            let p = crate::objective::sigmoid(s * t);
            if rng.gen::<f64>() < p {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let instance = ProblemInstance::new(a, raw_labels.clone(), FidelityKind::Logistic, 1.0, 0.0, bounds)?;
    Ok(LrDataset {
        instance,
        x_star,
        raw_labels,
    })
}
