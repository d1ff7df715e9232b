//! Certified global minimizers of `J0` at desk scale by enumerating every
//! support and solving the convex restriction on each, plus a
//! finite-difference gradient checker.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::objective::{objective_j0, spectral_norm_sq, ProblemInstance};

/// Enumeration guard: at most this many supports.
pub const MAX_SUPPORTS: u128 = 1 << 20;

const PG_TOL: f64 = 1e-10;
const PG_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSolve {
    /// Full-length minimizer, zero off the support.
    pub x: Array1<f64>,
    /// `F_y(Ax) + (lambda2 / 2) ||x||^2`, without the `l0` term.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes the smooth part over `x` supported on `support` and inside the
/// box, by accelerated projected gradient with restart, until the gradient
/// mapping has sup-norm at most `1e-10`.
pub fn restricted_convex_solve(inst: &ProblemInstance, support: &[usize]) -> Result<RestrictedSolve> {
    let n = inst.n_features();
    if let Some(&bad) = support.iter().find(|&&i| i >= n) {
        return Err(invalid("support", format!("index {bad} out of range for {n} features")));
    }
    let mut full = Array1::zeros(n);
    if support.is_empty() {
        let value = inst.fit_value(&Array1::zeros(inst.n_samples()))?;
        return Ok(RestrictedSolve {
            x: full,
            value,
            converged: true,
            iterations: 0,
        });
    }

    let a_s: Array2<f64> = inst.a().select(Axis(1), support);
    let lambda2 = inst.lambda2();
    let bounds = inst.bounds();
    let curvature = (0..inst.n_samples())
        .map(|m| inst.row_curvature_bound(m))
        .fold(0.0, f64::max);
    let lip = (spectral_norm_sq(&a_s)? * 1.01 * curvature + lambda2).max(1e-12);
    let step = 1.0 / lip;

    let smooth = |x: &Array1<f64>| -> Result<f64> { Ok(inst.fit_value(&a_s.dot(x))? + 0.5 * lambda2 * x.dot(x)) };
    let gradient = |x: &Array1<f64>| -> Result<Array1<f64>> {
        let (_, slope) = inst.fit_value_and_slope(&a_s.dot(x))?;
        let mut g = a_s.t().dot(&slope);
        g.scaled_add(lambda2, x);
        Ok(g)
    };
    let project = |v: Array1<f64>| v.mapv(|t| bounds.clip(t));

    let k = support.len();
    let mut x = Array1::<f64>::zeros(k);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < PG_MAX_ITER {
        let gx = gradient(&x)?;
        let mapping = project(&x - &(step * &gx));
        let pg = (&x - &mapping).iter().fold(0.0f64, |m, v| m.max(v.abs())) * lip;
        if pg <= PG_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let gy = gradient(&y)?;
        let x_new = project(&y - &(step * &gy));
        // gradient restart: drop momentum once it points uphill; objective
        // values are too flat near the optimum to drive this decision
        if (&y - &x_new).dot(&(&x_new - &x)) > 0.0 {
            t = 1.0;
            y = mapping.clone();
            x = mapping;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_new;
        y = project(&x_new + &(momentum * (&x_new - &x)));
        x = x_new;
        t = t_new;
    }
    let fx = smooth(&x)?;

    for (i, &idx) in support.iter().enumerate() {
        full[idx] = x[i];
    }
    Ok(RestrictedSolve {
        x: full,
        value: fx,
        converged,
        iterations,
    })
}

#[derive(Debug, Clone, Default)]
pub struct OracleOptions {
    /// Only supports of at most this size.
    pub support_cap: Option<usize>,
    /// Record the optimal smooth value of every solved support.
    pub record_table: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub x_star: Array1<f64>,
    pub j0_star: f64,
    /// Number of supports covered by the enumeration.
    pub supports_examined: u128,
    /// Supports actually solved; the rest were pruned because
    /// `lambda0 |S|` alone already exceeded the incumbent.
    pub supports_solved: usize,
    /// False if any restricted solve hit its iteration cap.
    pub all_converged: bool,
    pub per_support_values: Option<Vec<(Vec<usize>, f64)>>,
}

impl OracleResult {
    pub fn support(&self) -> Vec<usize> {
        self.x_star
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > crate::objective::ZERO_THRESHOLD)
            .map(|(i, _)| i)
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still move
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Global minimizer of `J0` over all supports (of size at most `support_cap`).
pub fn exhaustive_global(inst: &ProblemInstance, support_cap: Option<usize>) -> Result<OracleResult> {
    exhaustive_global_with(
        inst,
        &OracleOptions {
            support_cap,
            record_table: false,
        },
    )
}

pub fn exhaustive_global_with(inst: &ProblemInstance, opts: &OracleOptions) -> Result<OracleResult> {
    let n = inst.n_features();
    let cap = opts.support_cap.unwrap_or(n).min(n);
    let count: u128 = (0..=cap).map(|k| binomial(n, k)).sum();
    if count > MAX_SUPPORTS {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: MAX_SUPPORTS,
        });
    }
    let lambda0 = inst.lambda0();

    let mut best: Option<(f64, RestrictedSolve)> = None;
    let mut solved = 0usize;
    let mut all_converged = true;
    let mut table = opts.record_table.then(Vec::new);

    // Sizes are visited in increasing order and a whole level is solved
    // against the incumbent of the previous levels, so the result does not
    // depend on thread scheduling.
    for k in 0..=cap {
        let floor = lambda0 * k as f64;
        if let Some((incumbent, _)) = &best {
            if floor >= *incumbent {
                break;
            }
        }
        let supports = combinations(n, k);
        let results: Vec<Result<RestrictedSolve>> =
            supports.par_iter().map(|s| restricted_convex_solve(inst, s)).collect();
        solved += supports.len();
        for (support, res) in supports.iter().zip(results) {
            let res = res?;
            all_converged &= res.converged;
            let j0 = res.value + floor;
            if let Some(t) = table.as_mut() {
                t.push((support.clone(), res.value));
            }
            let better = match &best {
                None => true,
                Some((b, _)) => j0 < *b,
            };
            // equal values keep the earlier (smaller, then lexicographically first) support
            if better {
                best = Some((j0, res));
            }
        }
    }

    let (_, sol) = best.expect("the empty support is always solved");
    let j0_star = objective_j0(inst, sol.x.view())?;
    Ok(OracleResult {
        x_star: sol.x,
        j0_star,
        supports_examined: count,
        supports_solved: solved,
        all_converged,
        per_support_values: table,
    })
}

/// Largest relative error between central differences of `f` and `grad(x)`.
///
/// Coordinate `n` uses the step `h * max(1, |x_n|)`, and its error is
/// normalized by `max(1, |grad_n|)`.
pub fn finite_diff_check<F, G>(f: F, grad: G, x: ArrayView1<f64>, h: f64) -> Result<f64>
where
    F: Fn(ArrayView1<f64>) -> Result<f64>,
    G: Fn(ArrayView1<f64>) -> Result<Array1<f64>>,
{
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    let g = grad(x)?;
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch("gradient length differs from x".into()));
    }
    let mut probe = x.to_owned();
    let mut worst = 0.0f64;
    for n in 0..x.len() {
        let hn = h * x[n].abs().max(1.0);
        probe[n] = x[n] + hn;
        let up = f(probe.view())?;
        probe[n] = x[n] - hn;
        let down = f(probe.view())?;
        probe[n] = x[n];
        let fd = (up - down) / (2.0 * hn);
        worst = worst.max((fd - g[n]).abs() / g[n].abs().max(1.0));
    }
    Ok(worst)
}
