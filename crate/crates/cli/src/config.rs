//! Resolving settings from flags, the JSON config file and defaults, in
//! that order of precedence.

use std::fs;
use std::path::{Path, PathBuf};

use graud::{ExperimentSettings, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::args::{InputArgs, SolverArgs};
use crate::CliError;

pub const SEED_ENV: &str = "GRAUD_SEED";
pub const DEFAULT_LAMBDA1: f64 = 0.01;
pub const DEFAULT_LAMBDA2: f64 = 0.9;
pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_LAMBDA1_GRID: [f64; 5] = [0.001, 0.01, 0.1, 1.0, 10.0];
pub const DEFAULT_LAMBDA2_GRID: [f64; 5] = [0.1, 0.3, 0.9, 3.0, 9.0];

/// Contents of `--config`. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub edges: Option<PathBuf>,
    pub counts: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub nodes: Option<usize>,
    pub standardize: Option<bool>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub solver: Option<SolverConfig>,
    pub pseudocount: Option<f64>,
    pub init: Option<String>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub lambda1_grid: Option<Vec<f64>>,
    pub lambda2_grid: Option<Vec<f64>>,
    pub experiment: Option<ExperimentSettings>,
}

impl FileConfig {
    /// Reads the file; relative input paths are resolved against its directory.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.edges, &mut cfg.counts, &mut cfg.features].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Flag, then config value, then `GRAUD_SEED`, then 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
            Err(_) => Ok(0),
        }
    }

    pub fn inputs(&self, flags: &InputArgs) -> Result<InputConfig, CliError> {
        let need = |flag: &Option<PathBuf>, file: &Option<PathBuf>, name: &str| {
            flag.clone()
                .or_else(|| file.clone())
                .ok_or_else(|| CliError::Config(format!("missing --{name} (flag or config file)")))
        };
        Ok(InputConfig {
            edges: need(&flags.edges, &self.edges, "edges")?,
            counts: need(&flags.counts, &self.counts, "counts")?,
            features: need(&flags.features, &self.features, "features")?,
            nodes: flags.nodes.or(self.nodes),
            standardize: flags.standardize || self.standardize.unwrap_or(false),
        })
    }

    pub fn solver(&self, flags: &SolverArgs) -> SolverSettings {
        let mut solver = self.solver.clone().unwrap_or_default();
        if let Some(v) = flags.inner_iters {
            solver.inner_iters = v;
        }
        if let Some(v) = flags.outer_iters {
            solver.outer_iters = v;
        }
        if flags.step_size.is_some() {
            solver.step_size = flags.step_size;
        }
        if let Some(v) = flags.stop_threshold {
            solver.stop_threshold = v;
        }
        if flags.unconstrained {
            solver.project_feasible = false;
        }
        SolverSettings {
            lambda1: flags.lambda1.or(self.lambda1).unwrap_or(DEFAULT_LAMBDA1),
            lambda2: flags.lambda2.or(self.lambda2).unwrap_or(DEFAULT_LAMBDA2),
            pseudocount: flags.pseudocount.or(self.pseudocount),
            solver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputConfig {
    pub edges: PathBuf,
    pub counts: PathBuf,
    pub features: PathBuf,
    pub nodes: Option<usize>,
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub lambda1: f64,
    pub lambda2: f64,
    pub pseudocount: Option<f64>,
    pub solver: SolverConfig,
}
