use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brex_cli::certify::Status;
use brex_cli::check::Fault;
use brex_cli::{bench, certify, check, BenchConfig, CliError};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "brex",
    version,
    about = "Sparse regression benchmarks with exact l0 relaxations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured solver on every seed and write CSV results.
    Bench {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory, overriding `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare solvers and the relaxation against the exhaustive oracle.
    Certify {
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in verification battery.
    Check {
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    ProxSign,
}

/// Loads the config and applies the `--out` override.
fn load(config: &Path, out: Option<PathBuf>) -> Result<BenchConfig, CliError> {
    let mut cfg = BenchConfig::load(config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn run_bench(config: &Path, jobs: Option<usize>, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = load(config, out)?;
    let result = bench::run(&cfg, jobs)?;
    let dir = &cfg.output_dir;
    bench::write_outputs(&cfg, &result, dir)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} rows written to {}",
        result.rows.len(),
        bench::results_path(dir).display()
    );
    Ok(())
}

fn run_certify(config: &Path, jobs: Option<usize>, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = load(config, out)?;
    let report = certify::run(&cfg, jobs)?;
    let dir = &cfg.output_dir;
    certify::write_report(&report, dir)?;
    let seeds = cfg.seeds.len();
    for check in ["lower_bound", "exact_at_optimum", "oracle_optimality"] {
        println!(
            "{check:<18} pass {:>3}/{seeds}  fail {:>3}  skipped {:>3}",
            report.count(check, Status::Pass),
            report.count(check, Status::Fail),
            report.count(check, Status::Skipped)
        );
    }
    let total: f64 = report.oracle_ms.iter().map(|p| p.1).sum();
    let max = report.oracle_ms.iter().map(|p| p.1).fold(0.0, f64::max);
    println!("oracle time: mean {:.1} ms, max {max:.1} ms", total / seeds as f64);
    println!("report written to {}", certify::report_path(dir).display());
    if report.all_pass() {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .records
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| format!("seed {} {}: {}", r.seed, r.check, r.detail))
            .collect();
        Err(CliError::Verification(failed.join("; ")))
    }
}

fn run_check(fault: Option<FaultArg>) -> Result<(), CliError> {
    let fault = fault.map(|f| match f {
        FaultArg::ProxSign => Fault::ProxSign,
    });
    let batteries = check::run(fault);
    print!("{}", check::summary_table(&batteries));
    let failed: Vec<&str> = batteries.iter().filter(|b| !b.passed()).map(|b| b.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "failing batteries: {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Bench { config, jobs, out } => run_bench(&config, jobs, out),
        Command::Certify { config, jobs, out } => run_certify(&config, jobs, out),
        Command::Check { inject_fault } => run_check(inject_fault),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
