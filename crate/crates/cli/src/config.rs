//! Benchmark configuration, read from TOML.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use brex::datagen::{gen_lr_instance, gen_ls_instance, DataFidelity, DatasetSpec};
use brex::objective::{gamma_for_exactness, quadratic_components};
use brex::oracle::MAX_SUPPORTS;
use brex::{BrexComponent, ProblemInstance, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Fbs,
    Irl1,
    Iht,
    Oracle,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Fbs => "fbs",
            SolverKind::Irl1 => "irl1",
            SolverKind::Iht => "iht",
            SolverKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial point for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartRule {
    /// Zero, except `A^T y` for IHT on logistic data.
    #[default]
    Default,
    Zero,
    /// `A^T y` (labels as +-1) clipped to the box, for every solver.
    Correlation,
}

/// Dataset parameters; the seed comes from the seed list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub m: usize,
    pub n: usize,
    pub k_star: usize,
    pub corr_rho: f64,
    pub fidelity: DataFidelity,
    pub lower: f64,
    pub upper: f64,
}

impl DatasetConfig {
    pub fn spec(&self, seed: u64) -> DatasetSpec {
        DatasetSpec {
            m: self.m,
            n: self.n,
            k_star: self.k_star,
            corr_rho: self.corr_rho,
            fidelity: self.fidelity,
            lower: self.lower,
            upper: self.upper,
            seed,
        }
    }
}

fn default_margin() -> f64 {
    1e-6
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// `alpha` in `lambda0 = alpha F_y(0)`, recomputed per seed.
    pub lambda0_factor: f64,
    #[serde(default)]
    pub lambda2: f64,
    pub solvers: Vec<SolverKind>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_margin")]
    pub gamma_margin: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub start: StartRule,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub solver_options: SolverOptions,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| CliError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Invalid(msg));
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.solvers.iter().find(|s| !seen.insert(**s)) {
            return bad(format!("solver {dup} listed twice"));
        }
        if self.seeds.is_empty() {
            return bad("the seed list is empty".into());
        }
        if !(self.lambda0_factor > 0.0 && self.lambda0_factor < 1.0) {
            return bad(format!(
                "lambda0_factor must lie in (0, 1), got {}",
                self.lambda0_factor
            ));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad(format!("lambda2 must be non-negative, got {}", self.lambda2));
        }
        if !(self.gamma_margin >= 0.0 && self.gamma_margin.is_finite()) {
            return bad(format!("gamma_margin must be non-negative, got {}", self.gamma_margin));
        }
        self.dataset.spec(0).validate()?;
        self.solver_options.validate()?;
        if self.solvers.contains(&SolverKind::Oracle) {
            self.check_oracle_size()?;
        }
        Ok(())
    }

    pub fn check_oracle_size(&self) -> Result<(), CliError> {
        let n = self.dataset.n;
        if n >= 128 || (1u128 << n) > MAX_SUPPORTS {
            return Err(CliError::Invalid(format!(
                "exhaustive oracle needs N <= 20, got N = {n}"
            )));
        }
        Ok(())
    }

    /// Instance for one seed with `lambda0 = lambda0_factor * F_y(0)`.
    pub fn instance(&self, seed: u64) -> Result<ProblemInstance, CliError> {
        let spec = self.dataset.spec(seed);
        let inst = match spec.fidelity {
            DataFidelity::Ls { .. } => gen_ls_instance(&spec)?.instance,
            DataFidelity::Lr { .. } => gen_lr_instance(&spec)?.instance,
        };
        let f0 = inst.zero_fit();
        Ok(inst.with_regularization(self.lambda0_factor * f0, self.lambda2)?)
    }

    pub fn components(&self, inst: &ProblemInstance) -> Result<Vec<BrexComponent>, CliError> {
        let gamma = gamma_for_exactness(inst, self.gamma_margin)?;
        Ok(quadratic_components(inst, gamma.view())?)
    }
}

/// Contents of the metadata file written next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub prng: String,
    pub config: BenchConfig,
}

impl Metadata {
    pub fn new(config: &BenchConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            prng: brex::datagen::PRNG_NAME.to_string(),
            config: config.clone(),
        }
    }
}
