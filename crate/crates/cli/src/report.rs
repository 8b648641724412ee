use std::path::PathBuf;

use graud::{AssumptionReport, Solution};
use serde::{Deserialize, Serialize};

use crate::config::{InputConfig, SolverSettings};

pub const FORMAT_VERSION: u32 = 1;

/// Everything `graud solve` and `graud check` emit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub assumptions: AssumptionReport,
    /// The identifiability check failed and `--force` was given.
    pub forced: bool,
    pub solution: Option<Solution>,
    pub scoring: Option<Scoring>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub inputs: InputConfig,
    pub settings: Option<SolverSettings>,
    pub init: Option<String>,
    pub truth: Option<PathBuf>,
}

/// Relative ℓ1 errors against a supplied ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scoring {
    pub n_error: f64,
    pub p_error: f64,
}

/// Wall-clock milliseconds; the only fields that differ between reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Timing {
    pub load_ms: f64,
    pub solve_ms: f64,
    pub total_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}
