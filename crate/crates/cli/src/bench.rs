//! Batch runner: every configured solver on every seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use brex::objective::{objective_jpsi, support_size};
use brex::solvers::correlation_start;
use brex::{exhaustive_global, fbs_solve, iht_solve, irl1_solve, FidelityKind, ProblemInstance};
use ndarray::Array1;
use rayon::prelude::*;

use crate::config::{BenchConfig, Metadata, SolverKind, StartRule};
use crate::CliError;

pub const RESULTS_HEADER: [&str; 9] = [
    "seed",
    "solver",
    "J0",
    "Jpsi",
    "support_size",
    "iters",
    "converged",
    "wall_ms",
    "polish_applied",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub seed: u64,
    pub solver: SolverKind,
    /// `None` when the solver failed on this seed.
    pub j0: Option<f64>,
    pub jpsi: Option<f64>,
    pub support_size: usize,
    pub iters: usize,
    /// `"true"`, `"false"` or `"error: ..."`.
    pub status: String,
    pub wall_ms: f64,
    pub polish_applied: bool,
}

impl Row {
    fn failed(seed: u64, solver: SolverKind, err: &str, wall_ms: f64) -> Self {
        Row {
            seed,
            solver,
            j0: None,
            jpsi: None,
            support_size: 0,
            iters: 0,
            status: format!("error: {err}"),
            wall_ms,
            polish_applied: false,
        }
    }

    fn record(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |v| v.to_string());
        vec![
            self.seed.to_string(),
            self.solver.to_string(),
            num(self.j0),
            self.jpsi.map_or_else(String::new, |v| v.to_string()),
            self.support_size.to_string(),
            self.iters.to_string(),
            self.status.clone(),
            format!("{:.3}", self.wall_ms),
            self.polish_applied.to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// Ordered by seed (config order), then solver (config order).
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
}

pub(crate) fn start_point(rule: StartRule, solver: SolverKind, inst: &ProblemInstance) -> Array1<f64> {
    let correlation = match rule {
        StartRule::Zero => false,
        StartRule::Correlation => true,
        StartRule::Default => solver == SolverKind::Iht && inst.fidelity() == FidelityKind::Logistic,
    };
    if correlation {
        correlation_start(inst)
    } else {
        Array1::zeros(inst.n_features())
    }
}

fn run_solver(cfg: &BenchConfig, seed: u64, solver: SolverKind, inst: &ProblemInstance) -> Row {
    let start = Instant::now();
    let ms = |s: Instant| s.elapsed().as_secs_f64() * 1e3;
    let attempt = || -> Result<Row, CliError> {
        let comps = cfg.components(inst)?;
        if solver == SolverKind::Oracle {
            let r = exhaustive_global(inst, None)?;
            return Ok(Row {
                seed,
                solver,
                j0: Some(r.j0_star),
                jpsi: Some(objective_jpsi(inst, &comps, r.x_star.view())?),
                support_size: support_size(r.x_star.view()),
                iters: r.supports_solved,
                status: r.all_converged.to_string(),
                wall_ms: ms(start),
                polish_applied: false,
            });
        }
        let x0 = start_point(cfg.start, solver, inst);
        let opts = &cfg.solver_options;
        let r = match solver {
            SolverKind::Fbs => fbs_solve(inst, &comps, x0.view(), opts)?,
            SolverKind::Irl1 => irl1_solve(inst, &comps, x0.view(), opts)?,
            SolverKind::Iht => iht_solve(inst, x0.view(), opts)?,
            SolverKind::Oracle => unreachable!(),
        };
        Ok(Row {
            seed,
            solver,
            j0: Some(r.j0_final),
            jpsi: r.jpsi_final,
            support_size: support_size(r.x_hat.view()),
            iters: r.iterations,
            status: r.converged.to_string(),
            wall_ms: r.wall_time.as_secs_f64() * 1e3,
            polish_applied: r.polished,
        })
    };
    attempt().unwrap_or_else(|e| Row::failed(seed, solver, &e.to_string(), ms(start)))
}

fn run_seed(cfg: &BenchConfig, seed: u64) -> Vec<Row> {
    match cfg.instance(seed) {
        Ok(inst) => cfg.solvers.iter().map(|&s| run_solver(cfg, seed, s, &inst)).collect(),
        Err(e) => cfg
            .solvers
            .iter()
            .map(|&s| Row::failed(seed, s, &format!("instance generation: {e}"), 0.0))
            .collect(),
    }
}

/// Runs the batch on `jobs` threads (all cores when `None`).
pub fn run(cfg: &BenchConfig, jobs: Option<usize>) -> Result<BenchOutput, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let rows: Vec<Row> = pool
        .install(|| {
            cfg.seeds
                .par_iter()
                .map(|&seed| run_seed(cfg, seed))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
    let warnings = rows
        .iter()
        .filter(|r| r.j0.is_none())
        .map(|r| format!("seed {} solver {}: {}", r.seed, r.solver, r.status))
        .collect();
    Ok(BenchOutput { rows, warnings })
}

pub fn results_path(dir: &Path) -> PathBuf {
    dir.join("results.csv")
}

pub fn ordered_path(dir: &Path, solver: SolverKind) -> PathBuf {
    dir.join(format!("ordered_{solver}.csv"))
}

pub fn metadata_path(dir: &Path) -> PathBuf {
    dir.join("metadata.toml")
}

/// Writes `results.csv`, one `ordered_<solver>.csv` per solver and
/// `metadata.toml` into `dir`.
pub fn write_outputs(cfg: &BenchConfig, out: &BenchOutput, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let path = results_path(dir);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::csv(&path, e))?;
    w.write_record(RESULTS_HEADER).map_err(|e| CliError::csv(&path, e))?;
    for row in &out.rows {
        w.write_record(row.record()).map_err(|e| CliError::csv(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    for &solver in &cfg.solvers {
        let mut values: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.solver == solver)
            .filter_map(|r| r.j0)
            .collect();
        values.sort_by(f64::total_cmp);
        let path = ordered_path(dir, solver);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::csv(&path, e))?;
        w.write_record(["J0_sorted"]).map_err(|e| CliError::csv(&path, e))?;
        for v in values {
            w.write_record([v.to_string()]).map_err(|e| CliError::csv(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }

    let path = metadata_path(dir);
    let text = toml::to_string(&Metadata::new(cfg)).expect("metadata is always representable in TOML");
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(())
}
