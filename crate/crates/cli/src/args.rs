use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Joint estimation of true counts and discovery probabilities from
/// underreported counts on a graph.
#[derive(Debug, Parser)]
#[command(name = "graud", version)]
pub struct Cli {
    /// JSON config file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate n and p for an instance and write a JSON report.
    Solve(SolveArgs),
    /// Check the identifiability conditions for an instance.
    Check(CheckArgs),
    /// Select (lambda1, lambda2) by k-fold cross-validation.
    Cv(CvArgs),
    /// Generate a synthetic scenario and its input files.
    Simulate(SimulateArgs),
    /// Run one of the synthetic experiments and write its data table.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct InputArgs {
    /// Edge list: one "i j" pair per line, optional "nodes M" header.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Counts CSV with columns node,y.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Feature CSV, one row per node.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Node count, when the edge list has no header.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Standardize feature columns to mean 0 and variance 1.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub inner_iters: Option<usize>,
    #[arg(long)]
    pub outer_iters: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub stop_threshold: Option<f64>,
    /// Skip the projection onto u >= log y, v <= 0.
    #[arg(long)]
    pub unconstrained: bool,
    /// Add this constant to every count before taking logs.
    #[arg(long)]
    pub pseudocount: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Starting point: "default" (n = y, p = 1), "prob:<p>" (p = <p>,
    /// n = y/p) or "random:<seed>".
    #[arg(long)]
    pub init: Option<String>,
    /// Scenario JSON with ground truth; adds relative errors to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Solve even if the identifiability check fails.
    #[arg(long)]
    pub force: bool,
    /// Report path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated lambda1 candidates.
    #[arg(long, value_delimiter = ',')]
    pub lambda1_grid: Option<Vec<f64>>,
    /// Comma-separated lambda2 candidates.
    #[arg(long, value_delimiter = ',')]
    pub lambda2_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Score table CSV (lambda1,lambda2,fold,score).
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Selection JSON; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long = "feature-count")]
    pub feature_count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// path, ring or lattice.
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long)]
    pub prob_mean: Option<f64>,
    #[arg(long)]
    pub prob_sd: Option<f64>,
    /// Upper limit on pᵀLp.
    #[arg(long)]
    pub smoothness_cap: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
    /// Pin the smallest true count to this value.
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Directory for scenario.json, edges.txt, counts.csv, features.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// convergence, sweep-min-count, sweep-smoothness or m20.
    pub name: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Directory for <name>.csv and <name>.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}
