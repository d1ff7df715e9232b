//! Built-in verification battery with fixed internal seeds.

use brex::brex::{prox_beta_oracle, prox_objective, BetaOracle, GeneratingFunction};
use brex::datagen::{gen_lr_instance, gen_ls_instance, DataFidelity, DatasetSpec};
use brex::objective::{gamma_for_exactness, quadratic_components, residual_gradient};
use brex::oracle::finite_diff_check;
use brex::solvers::correlation_start;
use brex::{
    fbs_solve, iht_solve, irl1_solve, prox_beta, Bounds, BrexComponent, FidelityKind, ProblemInstance, SolverOptions,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Deliberate defects for testing the battery itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negate the output of the closed-form prox.
    ProxSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest error statistic observed, against `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    /// Inputs of the first failing case.
    pub first_failure: Option<String>,
}

impl Battery {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Battery {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
            tolerance,
            first_failure: None,
        }
    }

    fn case(&mut self, err: f64, inputs: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(err);
        // NaN counts as a failure
        if !(err <= self.tolerance) {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(inputs());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn rng(stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(0x6272_6578);
    r.set_stream(stream);
    r
}

fn random_component(r: &mut ChaCha20Rng) -> BrexComponent {
    loop {
        let (g, l0) = (r.gen_range(0.1..=10.0), r.gen_range(0.01..=5.0));
        let (lo, hi): (f64, f64) = (r.gen_range(-3.0..=0.0), r.gen_range(0.0..=3.0));
        if hi - lo < 1e-6 {
            continue;
        }
        if let Ok(c) = Bounds::new(lo, hi).and_then(|b| BrexComponent::quadratic(g, l0, b)) {
            return c;
        }
    }
}

fn describe(c: &BrexComponent) -> String {
    format!(
        "gamma={} lambda0={} box=[{}, {}]",
        c.psi().gamma().unwrap_or(f64::NAN),
        c.lambda0(),
        c.bounds().lower(),
        c.bounds().upper()
    )
}

fn prox_battery(fault: Option<Fault>) -> Battery {
    let mut bat = Battery::new("prox vs grid oracle", 1e-6);
    let mut r = rng(1);
    for _ in 0..300 {
        let c = random_component(&mut r);
        let b = c.bounds();
        let rho = 10f64.powf(r.gen_range(-2.0..=1.0));
        let x = r.gen_range(b.lower() - 3.0..=b.upper() + 3.0);
        let mut p = prox_beta(&c, rho, x).unwrap_or(f64::NAN);
        if fault == Some(Fault::ProxSign) {
            p = -p;
        }
        let q = prox_beta_oracle(&c, rho, x, 1e-3).unwrap_or(f64::NAN);
        let err = if b.contains(p) {
            prox_objective(&c, rho, x, p) - prox_objective(&c, rho, x, q)
        } else {
            f64::INFINITY
        };
        bat.case(err, || format!("{} rho={rho} x={x}: prox={p} oracle={q}", describe(&c)));
    }
    bat
}

fn penalty_battery() -> Battery {
    let mut bat = Battery::new("penalty vs grid oracle", 5e-3);
    let mut r = rng(2);
    for _ in 0..50 {
        let c = random_component(&mut r);
        let b = c.bounds();
        let oracle = GeneratingFunction::quadratic(c.psi().gamma().unwrap_or(1.0))
            .and_then(|psi| BetaOracle::new(psi, c.lambda0(), b, 1e-3));
        for _ in 0..20 {
            let x = r.gen_range(b.lower()..=b.upper());
            let err = match (&oracle, c.value(x)) {
                (Ok(o), Ok(v)) => (v - o.eval(x)).abs(),
                _ => f64::NAN,
            };
            bat.case(err, || format!("{} x={x}", describe(&c)));
        }
    }
    bat
}

fn small_instance(kind: FidelityKind, r: &mut ChaCha20Rng, seed: u64) -> ProblemInstance {
    let (m, n) = (r.gen_range(5..=20), r.gen_range(5..=20));
    let (a, y, bounds) = match kind {
        FidelityKind::KullbackLeibler { .. } => {
            let a = Array2::from_shape_fn((m, n), |_| r.gen_range(0.0..1.0));
            let y = Array1::from_shape_fn(m, |_| r.gen_range(0.0..4.0f64).floor());
            (a, y, Bounds::new(0.0, 2.0).expect("valid box"))
        }
        _ => {
            let a = brex::datagen::gen_design(m, n, 0.5, seed).expect("valid design");
            let y = if kind == FidelityKind::Logistic {
                Array1::from_shape_fn(m, |_| if r.gen_bool(0.5) { 1.0 } else { -1.0 })
            } else {
                Array1::from_shape_fn(m, |_| r.gen_range(-2.0..2.0))
            };
            (a, y, Bounds::symmetric(1.5).expect("valid box"))
        }
    };
    ProblemInstance::new(a, y, kind, 0.1, 0.0, bounds).expect("valid instance")
}

fn gradient_battery() -> Battery {
    let mut bat = Battery::new("finite-difference gradients", 1e-5);
    let mut r = rng(3);
    let kinds = [
        FidelityKind::LeastSquares,
        FidelityKind::Logistic,
        FidelityKind::KullbackLeibler { background: 1.0 },
    ];
    for kind in kinds {
        for seed in 0..10 {
            let inst = small_instance(kind, &mut r, seed);
            let b = inst.bounds();
            let x: Array1<f64> = (0..inst.n_features())
                .map(|_| r.gen_range(b.lower() + 1e-3..=b.upper() - 1e-3))
                .collect();
            let err = finite_diff_check(
                |v| residual_gradient(&inst, v).map(|p| p.0),
                |v| residual_gradient(&inst, v).map(|p| p.1),
                x.view(),
                1e-6,
            )
            .unwrap_or(f64::NAN);
            bat.case(err, || {
                format!("{kind:?} seed={seed} M={} N={}", inst.n_samples(), inst.n_features())
            });
        }
    }
    bat
}

/// Largest increase between consecutive trace entries.
fn max_rise(trace: &[f64]) -> f64 {
    trace.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn descent_battery() -> Battery {
    let mut bat = Battery::new("descent monotonicity", 1e-12);
    let opts = SolverOptions::default();
    for seed in 0..5u64 {
        for lr in [false, true] {
            let spec = DatasetSpec {
                m: 30,
                n: 40,
                k_star: 4,
                corr_rho: 0.9,
                fidelity: if lr {
                    DataFidelity::Lr { s: 1.0 }
                } else {
                    DataFidelity::Ls { snr: 10.0 }
                },
                lower: if lr { -1.0 } else { -1.5 },
                upper: if lr { 1.0 } else { 1.5 },
                seed,
            };
            let generated = if lr {
                gen_lr_instance(&spec).map(|d| d.instance)
            } else {
                gen_ls_instance(&spec).map(|d| d.instance)
            };
            let inst = generated.and_then(|i| {
                let f0 = i.zero_fit();
                i.with_regularization(0.02 * f0, if lr { 1.0 } else { 0.0 })
            });
            let rises = inst.and_then(|inst| {
                let gamma = gamma_for_exactness(&inst, 1e-6)?;
                let comps = quadratic_components(&inst, gamma.view())?;
                let x0 = Array1::zeros(inst.n_features());
                let start = if lr { correlation_start(&inst) } else { x0.clone() };
                Ok([
                    max_rise(&fbs_solve(&inst, &comps, x0.view(), &opts)?.objective_trace),
                    max_rise(&irl1_solve(&inst, &comps, x0.view(), &opts)?.objective_trace),
                    max_rise(&iht_solve(&inst, start.view(), &opts)?.objective_trace),
                ])
            });
            let label = if lr { "logistic" } else { "least squares" };
            match rises {
                Ok(rs) => {
                    for (solver, rise) in ["fbs", "irl1", "iht"].iter().zip(rs) {
                        bat.case(rise, || {
                            format!("{solver} on {label} seed={seed}: trace rose by {rise:e}")
                        });
                    }
                }
                Err(e) => bat.case(f64::NAN, || format!("{label} seed={seed}: {e}")),
            }
        }
    }
    bat
}

pub fn run(fault: Option<Fault>) -> Vec<Battery> {
    vec![
        prox_battery(fault),
        penalty_battery(),
        gradient_battery(),
        descent_battery(),
    ]
}

pub fn summary_table(batteries: &[Battery]) -> String {
    let mut s = format!(
        "{:<30} {:>6} {:>8} {:>10} {:>9}  status\n",
        "battery", "cases", "failures", "worst", "tolerance"
    );
    for b in batteries {
        s.push_str(&format!(
            "{:<30} {:>6} {:>8} {:>10.2e} {:>9.0e}  {}\n",
            b.name,
            b.cases,
            b.failures,
            b.worst,
            b.tolerance,
            if b.passed() { "PASS" } else { "FAIL" }
        ));
        if let Some(f) = &b.first_failure {
            s.push_str(&format!("  first failing case: {f}\n"));
        }
    }
    s
}
