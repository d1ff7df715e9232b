//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

mod common;

use std::time::{Duration, Instant};

use brex::brex::{prox_beta_oracle, prox_objective, BetaOracle};
use brex::datagen::{gen_lr_instance, gen_ls_instance, DataFidelity, DatasetSpec};
use brex::objective::{gamma_for_exactness, objective_j0, objective_jpsi, quadratic_components, residual_gradient};
use brex::oracle::{exhaustive_global, finite_diff_check};
use brex::solvers::correlation_start;
use brex::{
    fbs_solve, iht_solve, irl1_solve, prox_beta, Bounds, BrexComponent, GeneratingFunction, ProblemInstance,
    SolverOptions, SolverResult,
};
use common::{box_point, exact_components, instance, nonincreasing, rng, Kind};
use ndarray::Array1;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

/// `|J_psi - J0|` at every polished relaxation output produced by the suite.
type Gaps = Vec<f64>;

fn timed(name: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome {
        name,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn random_component<R: Rng>(r: &mut R) -> BrexComponent {
    loop {
        let (g, l0) = (r.gen_range(0.1..=10.0), r.gen_range(0.01..=5.0));
        let (lo, hi): (f64, f64) = (r.gen_range(-3.0..=0.0), r.gen_range(0.0..=3.0));
        if hi - lo < 1e-6 {
            continue;
        }
        return BrexComponent::quadratic(g, l0, Bounds::new(lo, hi).unwrap()).unwrap();
    }
}

fn penalty_oracle() -> (bool, String) {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let c = random_component(&mut r);
        let b = c.bounds();
        let psi = GeneratingFunction::quadratic(c.psi().gamma().unwrap()).unwrap();
        let oracle = BetaOracle::new(psi, c.lambda0(), b, 1e-3).unwrap();
        for _ in 0..50 {
            let x = r.gen_range(b.lower()..=b.upper());
            worst = worst.max((c.value(x).unwrap() - oracle.eval(x)).abs());
        }
    }
    (
        worst <= 5e-3,
        format!("200 configs x 50 points, max |beta - oracle| = {worst:.2e} (tol 5e-3)"),
    )
}

fn prox_oracle() -> (bool, String) {
    let mut r = rng(202);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let c = random_component(&mut r);
        let b = c.bounds();
        let rho = 10f64.powf(r.gen_range(-2.0..=1.0));
        let x = r.gen_range(b.lower() - 3.0..=b.upper() + 3.0);
        let p = prox_beta(&c, rho, x).unwrap();
        let q = prox_beta_oracle(&c, rho, x, 1e-3).unwrap();
        worst = worst.max(prox_objective(&c, rho, x, p) - prox_objective(&c, rho, x, q));
    }
    (
        worst <= 1e-6,
        format!("1000 tuples, max (prox value - grid value) = {worst:.2e} (tol 1e-6)"),
    )
}

fn gradient_checks() -> (bool, String) {
    let mut parts = Vec::new();
    let mut pass = true;
    for (kind, label) in [(Kind::Ls, "LS"), (Kind::Lr, "LR"), (Kind::Kl, "KL")] {
        let mut worst = 0.0f64;
        for seed in 0..20u64 {
            let mut r = rng(3000 + seed);
            let (m, n) = (r.gen_range(5..=30), r.gen_range(5..=30));
            let inst = instance(kind, seed, m, n, 0.05, 0.0);
            let b = inst.bounds();
            let x = box_point(&mut r, b, n).mapv(|v| v.clamp(b.lower() + 1e-3, b.upper() - 1e-3));
            let err = finite_diff_check(
                |v| residual_gradient(&inst, v).map(|p| p.0),
                |v| residual_gradient(&inst, v).map(|p| p.1),
                x.view(),
                1e-6,
            )
            .unwrap();
            worst = worst.max(err);
        }
        pass &= worst <= 1e-5;
        parts.push(format!("{label} {worst:.1e}"));
    }
    (
        pass,
        format!(
            "max relative error over 20 instances each: {} (tol 1e-5)",
            parts.join(", ")
        ),
    )
}

fn ls_spec(m: usize, n: usize, k: usize, seed: u64) -> DatasetSpec {
    DatasetSpec {
        m,
        n,
        k_star: k,
        corr_rho: 0.9,
        fidelity: DataFidelity::Ls { snr: 10.0 },
        lower: -1.5,
        upper: 1.5,
        seed,
    }
}

fn lr_spec(m: usize, n: usize, k: usize, seed: u64) -> DatasetSpec {
    DatasetSpec {
        m,
        n,
        k_star: k,
        corr_rho: 0.9,
        fidelity: DataFidelity::Lr { s: 1.0 },
        lower: -1.0,
        upper: 1.0,
        seed,
    }
}

fn with_factor(inst: ProblemInstance, factor: f64, lambda2: f64) -> ProblemInstance {
    let f0 = inst.zero_fit();
    inst.with_regularization(factor * f0, lambda2).unwrap()
}

fn ls_problem(m: usize, n: usize, k: usize, seed: u64, factor: f64, lambda2: f64) -> ProblemInstance {
    with_factor(
        gen_ls_instance(&ls_spec(m, n, k, seed)).unwrap().instance,
        factor,
        lambda2,
    )
}

fn lr_problem(m: usize, n: usize, k: usize, seed: u64) -> ProblemInstance {
    with_factor(gen_lr_instance(&lr_spec(m, n, k, seed)).unwrap().instance, 2.5e-2, 1.0)
}

fn components(inst: &ProblemInstance) -> Vec<BrexComponent> {
    let gamma = gamma_for_exactness(inst, 1e-6).unwrap();
    quadratic_components(inst, gamma.view()).unwrap()
}

fn default_start(inst: &ProblemInstance) -> Array1<f64> {
    match inst.fidelity() {
        brex::FidelityKind::Logistic => correlation_start(inst),
        _ => Array1::zeros(inst.n_features()),
    }
}

fn gap(inst: &ProblemInstance, comps: &[BrexComponent], r: &SolverResult) -> f64 {
    (objective_jpsi(inst, comps, r.x_hat.view()).unwrap() - objective_j0(inst, r.x_hat.view()).unwrap()).abs()
}

fn descent(gaps: &mut Gaps) -> (bool, String) {
    let opts = SolverOptions::default();
    let per_seed: Vec<(usize, Vec<f64>)> = (0..40u64)
        .into_par_iter()
        .map(|i| {
            let seed = i % 20;
            let inst = if i < 20 {
                ls_problem(50, 100, 5, seed, 2e-2, 0.0)
            } else {
                lr_problem(50, 100, 5, seed)
            };
            let comps = components(&inst);
            let x0 = Array1::zeros(inst.n_features());
            let f = fbs_solve(&inst, &comps, x0.view(), &opts).unwrap();
            let r = irl1_solve(&inst, &comps, x0.view(), &opts).unwrap();
            let h = iht_solve(&inst, default_start(&inst).view(), &opts).unwrap();
            let bad = [&f, &r, &h]
                .iter()
                .filter(|s| nonincreasing(&s.objective_trace, 1e-12).is_some())
                .count();
            (bad, vec![gap(&inst, &comps, &f), gap(&inst, &comps, &r)])
        })
        .collect();
    let bad: usize = per_seed.iter().map(|p| p.0).sum();
    gaps.extend(per_seed.into_iter().flat_map(|p| p.1));
    (
        bad == 0,
        format!("120 traces (FBS, IRL1, IHT on 20 LS + 20 LR instances), {bad} with an increase above 1e-12"),
    )
}

fn lower_bound() -> (bool, String) {
    let kinds = [Kind::Ls, Kind::Lr, Kind::Kl];
    let rows: Vec<(usize, f64, usize, f64)> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let inst = instance(
                kinds[i as usize % 3],
                500 + i,
                20,
                15,
                0.05,
                if i % 2 == 0 { 0.0 } else { 0.5 },
            );
            let comps = exact_components(&inst);
            let mut r = rng(600 + i);
            let (mut above, mut worst_above, mut strict, mut worst_eq) = (0, f64::NEG_INFINITY, 0, 0.0f64);
            for _ in 0..10_000 {
                let x = box_point(&mut r, inst.bounds(), 15);
                let (j0, jpsi) = (
                    objective_j0(&inst, x.view()).unwrap(),
                    objective_jpsi(&inst, &comps, x.view()).unwrap(),
                );
                worst_above = worst_above.max(jpsi - j0);
                // J0 adds lambda0 * k in one product, J_psi sums N penalty terms
                if jpsi > j0 + 1e-12 {
                    above += 1;
                }
                if jpsi < j0 {
                    strict += 1;
                }
                // same point with every concave-region coordinate snapped to 0
                let snapped: Array1<f64> = x
                    .iter()
                    .zip(&comps)
                    .map(|(&v, c)| if c.in_concave_region(v) { 0.0 } else { v })
                    .collect();
                let diff = objective_jpsi(&inst, &comps, snapped.view()).unwrap()
                    - objective_j0(&inst, snapped.view()).unwrap();
                worst_eq = worst_eq.max(diff.abs());
            }
            (above, worst_above, strict, worst_eq)
        })
        .collect();
    let above: usize = rows.iter().map(|r| r.0).sum();
    let worst_above = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let strict: usize = rows.iter().map(|r| r.2).sum();
    let worst_eq = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    (
        above == 0 && worst_eq <= 1e-12,
        format!(
            "20 instances x 1e4 points: {above} with J_psi > J0 + 1e-12 (max J_psi - J0 = {worst_above:.1e}), {strict} strict; \
             max |J_psi - J0| off the concave regions = {worst_eq:.1e} (tol 1e-12)"
        ),
    )
}

fn best_of_starts(inst: &ProblemInstance, comps: &[BrexComponent], seed: u64, gaps: &mut Gaps) -> f64 {
    let opts = SolverOptions::default();
    let n = inst.n_features();
    let mut r = rng(7000 + seed);
    let mut starts = vec![Array1::zeros(n)];
    starts.extend((0..5).map(|_| box_point(&mut r, inst.bounds(), n)));
    let mut best = f64::INFINITY;
    for x0 in &starts {
        for res in [
            fbs_solve(inst, comps, x0.view(), &opts).unwrap(),
            irl1_solve(inst, comps, x0.view(), &opts).unwrap(),
        ] {
            gaps.push(gap(inst, comps, &res));
            best = best.min(res.j0_final);
        }
    }
    best
}

fn certified(gaps: &mut Gaps) -> (bool, String) {
    let rows: Vec<(f64, f64, Gaps)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let inst = ls_problem(8, 10, 3, seed, 2e-2, 0.0);
            let comps = components(&inst);
            let star = exhaustive_global(&inst, None).unwrap();
            let mut g = Vec::new();
            let best = best_of_starts(&inst, &comps, seed, &mut g);
            (best, star.j0_star, g)
        })
        .collect();
    let hits = rows.iter().filter(|(b, s, _)| *b <= s + 1e-6).count();
    let below = rows.iter().filter(|(b, s, _)| *b < s - 1e-8).count();
    let worst = rows.iter().map(|(b, s, _)| b - s).fold(f64::NEG_INFINITY, f64::max);
    gaps.extend(rows.into_iter().flat_map(|r| r.2));
    (
        hits >= 16 && below == 0,
        format!("best of FBS/IRL1 reaches J0* + 1e-6 on {hits}/20 seeds (need 16), {below} below J0* - 1e-8, worst excess {worst:.2e}"),
    )
}

fn beats_direct(gaps: &mut Gaps) -> (bool, String) {
    let opts = SolverOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, lr) in [("LS", false), ("LR", true)] {
        let rows: Vec<(f64, f64, f64, f64)> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let inst = if lr {
                    lr_problem(100, 200, 7, seed)
                } else {
                    ls_problem(100, 200, 10, seed, 2e-2, 0.0)
                };
                let comps = components(&inst);
                let x0 = Array1::zeros(inst.n_features());
                let f = fbs_solve(&inst, &comps, x0.view(), &opts).unwrap();
                let h = iht_solve(&inst, default_start(&inst).view(), &opts).unwrap();
                (
                    f.j0_final,
                    h.j0_final,
                    f.wall_time.as_secs_f64(),
                    gap(&inst, &comps, &f),
                )
            })
            .collect();
        let fbs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let iht: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let mean_time = rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64;
        gaps.extend(rows.iter().map(|r| r.3));
        let (mf, mi) = (median(&fbs), median(&iht));
        let wins = fbs.iter().zip(&iht).filter(|(f, i)| f <= i).count();
        pass &= mf <= mi && mean_time <= 30.0;
        parts.push(format!(
            "{label}: median J0 FBS {mf:.4} vs IHT {mi:.4}, FBS <= IHT on {wins}/20, mean FBS time {mean_time:.3}s"
        ));
    }
    (pass, parts.join("; "))
}

fn zero_trap() -> (bool, String) {
    let opts = SolverOptions::default();
    let rows: Vec<(bool, bool)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let inst = lr_problem(100, 200, 7, seed);
            let from_zero = iht_solve(&inst, Array1::zeros(inst.n_features()).view(), &opts).unwrap();
            let from_corr = iht_solve(&inst, correlation_start(&inst).view(), &opts).unwrap();
            (
                from_zero.x_hat.iter().all(|&v| v == 0.0),
                from_corr.x_hat.iter().any(|&v| v != 0.0),
            )
        })
        .collect();
    let trapped = rows.iter().filter(|r| r.0).count();
    let escaped = rows.iter().filter(|r| r.1).count();
    let both = rows.iter().filter(|r| r.0 && r.1).count();
    (
        both >= 18,
        format!("IHT stays at 0 from x0 = 0 on {trapped}/20, leaves 0 from A^T y on {escaped}/20, both on {both}/20 (need 18)"),
    )
}

fn ablation(gaps: &mut Gaps) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda2 in [0.0, 2.0] {
        let rows: Vec<(usize, f64, f64, bool, Gaps)> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let inst = ls_problem(8, 10, 3, seed, 5.5e-3, lambda2);
                let comps = components(&inst);
                let star = exhaustive_global(&inst, None).unwrap();
                let mut g = Vec::new();
                let best = best_of_starts(&inst, &comps, seed, &mut g);
                let mut r = rng(9000 + seed);
                let sampled_ok = (0..1000).all(|_| {
                    let x = box_point(&mut r, inst.bounds(), 10);
                    objective_j0(&inst, x.view()).unwrap() >= star.j0_star - 1e-8
                });
                (
                    star.support().len(),
                    star.j0_star,
                    best,
                    sampled_ok && best >= star.j0_star - 1e-8,
                    g,
                )
            })
            .collect();
        let consistent = rows.iter().filter(|r| r.3).count();
        let reached = rows.iter().filter(|r| r.2 <= r.1 + 1e-6).count();
        let mean_support = rows.iter().map(|r| r.0 as f64).sum::<f64>() / 20.0;
        let mean_j0 = rows.iter().map(|r| r.1).sum::<f64>() / 20.0;
        pass &= consistent == 20;
        parts.push(format!(
            "lambda2={lambda2}: oracle never beaten on {consistent}/20, mean oracle support {mean_support:.2}, \
             mean J0* {mean_j0:.4}, solvers reach J0* on {reached}/20"
        ));
        gaps.extend(rows.into_iter().flat_map(|r| r.4));
    }
    (pass, parts.join("; "))
}

fn main() {
    let mut gaps = Gaps::new();
    let mut outcomes = vec![
        timed("penalty oracle equivalence", penalty_oracle),
        timed("prox oracle equivalence", prox_oracle),
        timed("gradient checks", gradient_checks),
        timed("descent monotonicity", || descent(&mut gaps)),
        timed("relaxation lower bound", lower_bound),
        timed("exactness at certified scale", || certified(&mut gaps)),
        timed("relaxation beats direct l0", || beats_direct(&mut gaps)),
        timed("IHT zero trap on logistic", zero_trap),
        timed("ridge ablation", || ablation(&mut gaps)),
    ];
    let worst_gap = gaps.iter().copied().fold(0.0, f64::max);
    outcomes.insert(
        7,
        Outcome {
            name: "post-polish tightness",
            pass: worst_gap <= 1e-9,
            detail: format!(
                "{} polished outputs, max |J_psi - J0| = {worst_gap:.1e} (tol 1e-9)",
                gaps.len()
            ),
            elapsed: Duration::ZERO,
        },
    );

    let limits = [
        60.0,
        60.0,
        30.0,
        f64::INFINITY,
        f64::INFINITY,
        300.0,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
    ];
    let mut failed = 0;
    for (o, limit) in outcomes.iter_mut().zip(limits) {
        let secs = o.elapsed.as_secs_f64();
        if secs > limit {
            o.pass = false;
            o.detail
                .push_str(&format!("; runtime {secs:.1}s over the {limit}s budget"));
        }
        println!(
            "{} {} ({secs:.2}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
