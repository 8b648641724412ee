//! Synthetic-experiment harness.
//!
//! Repetition `r` of a run with base seed `s` uses scenario seed `s + r`.
//! Sweeps reuse the same seeds at every sweep level, so the curves compare
//! levels on common random draws. Repetitions run in parallel; results are
//! collected in seed order, so output does not depend on scheduling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::relative_l1_error;
use crate::design::projection_matrix;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::solver::{default_init, solve, ProblemInstance, Solution, SolverConfig};
use crate::synth::{make_scenario, stream_rng, GeneratorConfig, ProbSettings, Scenario};

const STREAM_INIT: u64 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    SweepMinCount,
    SweepSmoothness,
    M20,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Convergence,
        ExperimentKind::SweepMinCount,
        ExperimentKind::SweepSmoothness,
        ExperimentKind::M20,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::SweepMinCount => "sweep-min-count",
            ExperimentKind::SweepSmoothness => "sweep-smoothness",
            ExperimentKind::M20 => "m20",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Settings shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    pub node_count: usize,
    pub feature_count: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub repetitions: usize,
    /// Sweeps cover `k = 1..=k_max`.
    pub k_max: usize,
    pub generator: GeneratorConfig,
    pub solver: SolverConfig,
    /// Added to every count when a scenario contains a zero observation.
    pub pseudocount: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            node_count: 10,
            feature_count: 3,
            lambda1: 0.01,
            lambda2: 0.9,
            repetitions: 100,
            k_max: 30,
            generator: GeneratorConfig {
                probs: ProbSettings {
                    max_attempts: 1_000_000,
                    ..ProbSettings::default()
                },
                ..GeneratorConfig::default()
            },
            solver: SolverConfig::default(),
            pseudocount: 0.5,
        }
    }
}

impl ExperimentSettings {
    /// Twenty nodes, `p ~ clip(0.3 + 0.05ε)`, `pᵀLp/M ≤ 0.001`, 50 seeds.
    pub fn m20() -> Self {
        let base = Self::default();
        ExperimentSettings {
            node_count: 20,
            repetitions: 50,
            generator: GeneratorConfig {
                probs: ProbSettings {
                    mean: 0.3,
                    sd: 0.05,
                    smoothness_cap: 0.001 * 20.0,
                    ..base.generator.probs.clone()
                },
                ..base.generator.clone()
            },
            ..base
        }
    }

    pub fn for_kind(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::M20 => Self::m20(),
            _ => Self::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions", "must be positive"));
        }
        if self.k_max == 0 {
            return Err(Error::invalid("k_max", "must be positive"));
        }
        if !(self.pseudocount > 0.0) {
            return Err(Error::invalid("pseudocount", "must be positive"));
        }
        Ok(())
    }

    fn scenario(&self, generator: &GeneratorConfig, seed: u64) -> Result<Scenario> {
        make_scenario(self.node_count, self.feature_count, generator, seed)
    }

    fn instance(&self, scenario: &Scenario) -> Result<ProblemInstance> {
        let basis = projection_matrix(&scenario.feature_matrix())?;
        let pseudocount = scenario.has_zero_counts().then_some(self.pseudocount);
        ProblemInstance::from_counts(
            &scenario.counts_f64(),
            pseudocount,
            scenario.graph.laplacian(),
            basis.projector().clone(),
            self.lambda1,
            self.lambda2,
        )
    }
}

/// Accuracy of one fitted scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunErrors {
    pub seed: u64,
    pub n_error: f64,
    pub p_error: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Fits one scenario and scores it against the ground truth.
pub fn fit_scenario(scenario: &Scenario, settings: &ExperimentSettings) -> Result<(Solution, RunErrors)> {
    let inst = settings.instance(scenario)?;
    let sol = solve(&inst, &settings.solver, None)?;
    let truth_n: Vec<f64> = scenario.n0.iter().map(|&n| n as f64).collect();
    let errors = RunErrors {
        seed: scenario.seed,
        n_error: relative_l1_error(&sol.n_hat, &truth_n)?,
        p_error: relative_l1_error(&sol.p_hat, &scenario.p0)?,
        converged: sol.converged,
        iterations: sol.iterations_used,
    };
    Ok((sol, errors))
}

fn run_seeds(settings: &ExperimentSettings, generator: &GeneratorConfig, seed: u64) -> Result<Vec<RunErrors>> {
    (0..settings.repetitions as u64)
        .into_par_iter()
        .map(|r| {
            let scenario = settings.scenario(generator, seed.wrapping_add(r))?;
            fit_scenario(&scenario, settings).map(|(_, e)| e)
        })
        .collect()
}

/// Per-seed errors of the base generator over `repetitions` seeds.
pub fn replicate(settings: &ExperimentSettings, seed: u64) -> Result<Vec<RunErrors>> {
    settings.validate()?;
    run_seeds(settings, &settings.generator, seed)
}

/// One level of a sweep, averaged over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: usize,
    /// Minimum true count, or the absolute `pᵀLp` cap.
    pub level: f64,
    pub mean_n_error: f64,
    pub mean_p_error: f64,
    pub repetitions: usize,
}

fn summarize(k: usize, level: f64, runs: &[RunErrors]) -> SweepPoint {
    let r = runs.len() as f64;
    SweepPoint {
        k,
        level,
        mean_n_error: runs.iter().map(|e| e.n_error).sum::<f64>() / r,
        mean_p_error: runs.iter().map(|e| e.p_error).sum::<f64>() / r,
        repetitions: runs.len(),
    }
}

/// Error versus the minimum true count `k`.
pub fn sweep_min_count(settings: &ExperimentSettings, seed: u64) -> Result<Vec<SweepPoint>> {
    settings.validate()?;
    (1..=settings.k_max)
        .map(|k| {
            let generator = GeneratorConfig {
                min_count: Some(k as u64),
                ..settings.generator.clone()
            };
            Ok(summarize(k, k as f64, &run_seeds(settings, &generator, seed)?))
        })
        .collect()
}

/// Error versus the smoothness cap `pᵀLp ≤ 0.001·k·M`.
pub fn sweep_smoothness(settings: &ExperimentSettings, seed: u64) -> Result<Vec<SweepPoint>> {
    settings.validate()?;
    (1..=settings.k_max)
        .map(|k| {
            let cap = 0.001 * k as f64 * settings.node_count as f64;
            let mut generator = settings.generator.clone();
            generator.probs.smoothness_cap = cap;
            Ok(summarize(k, cap, &run_seeds(settings, &generator, seed)?))
        })
        .collect()
}

/// Loss history of one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub init: String,
    pub initial_loss: f64,
    pub losses: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn terminal_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(self.initial_loss)
    }
}

/// A random start: `u = ỹ + |z|`, `v = -|z'|` with `z, z'` standard normal.
pub fn random_init(y_log: &DVector<f64>, seed: u64) -> (DVector<f64>, DVector<f64>) {
    let mut rng = stream_rng(seed, STREAM_INIT);
    let u = y_log.map(|y| y + rng.sample::<f64, _>(StandardNormal).abs());
    let v = DVector::from_fn(y_log.len(), |_, _| -rng.sample::<f64, _>(StandardNormal).abs());
    (u, v)
}

/// Loss traces on the scenario with seed `seed` from the default start and
/// from `starts` random starts.
pub fn convergence(settings: &ExperimentSettings, seed: u64, starts: usize) -> Result<Vec<ConvergenceTrace>> {
    settings.validate()?;
    let scenario = settings.scenario(&settings.generator, seed)?;
    let inst = settings.instance(&scenario)?;
    let mut inits = Vec::with_capacity(starts + 1);
    let default = if scenario.has_zero_counts() {
        (inst.y_log().clone(), DVector::zeros(inst.len()))
    } else {
        default_init(&scenario.counts_f64())?
    };
    inits.push(("default".to_string(), default));
    for s in 0..starts as u64 {
        inits.push((format!("random-{}", s + 1), random_init(inst.y_log(), seed.wrapping_add(s))));
    }
    inits
        .into_iter()
        .map(|(name, start)| {
            let sol = solve(&inst, &settings.solver, Some(start))?;
            Ok(ConvergenceTrace {
                init: name,
                initial_loss: sol.initial_loss,
                losses: sol.loss_trace,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentOutput {
    Convergence { traces: Vec<ConvergenceTrace> },
    SweepMinCount { points: Vec<SweepPoint> },
    SweepSmoothness { points: Vec<SweepPoint> },
    M20 { runs: Vec<RunErrors> },
}

/// Runs a named experiment with the given settings.
pub fn run_experiment(kind: ExperimentKind, settings: &ExperimentSettings, seed: u64) -> Result<ExperimentOutput> {
    Ok(match kind {
        ExperimentKind::Convergence => ExperimentOutput::Convergence {
            traces: convergence(settings, seed, 2)?,
        },
        ExperimentKind::SweepMinCount => ExperimentOutput::SweepMinCount {
            points: sweep_min_count(settings, seed)?,
        },
        ExperimentKind::SweepSmoothness => ExperimentOutput::SweepSmoothness {
            points: sweep_smoothness(settings, seed)?,
        },
        ExperimentKind::M20 => ExperimentOutput::M20 {
            runs: replicate(settings, seed)?,
        },
    })
}

impl ExperimentOutput {
    /// Mean `(n, p)` errors for the per-seed output.
    pub fn mean_errors(&self) -> Option<(f64, f64)> {
        match self {
            ExperimentOutput::M20 { runs } if !runs.is_empty() => {
                let r = runs.len() as f64;
                Some((
                    runs.iter().map(|e| e.n_error).sum::<f64>() / r,
                    runs.iter().map(|e| e.p_error).sum::<f64>() / r,
                ))
            }
            _ => None,
        }
    }

    /// Writes the data table as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let res = match self {
            ExperimentOutput::Convergence { traces } => {
                w.write_record(["init", "iteration", "loss"]).and_then(|_| {
                    for t in traces {
                        w.write_record([t.init.as_str(), "0", &fmt_f64(t.initial_loss)])?;
                        for (i, l) in t.losses.iter().enumerate() {
                            w.write_record([t.init.clone(), (i + 1).to_string(), fmt_f64(*l)])?;
                        }
                    }
                    Ok(())
                })
            }
            ExperimentOutput::SweepMinCount { points } | ExperimentOutput::SweepSmoothness { points } => w
                .write_record(["k", "level", "mean_n_error", "mean_p_error", "repetitions"])
                .and_then(|_| {
                    for p in points {
                        w.write_record([
                            p.k.to_string(),
                            fmt_f64(p.level),
                            fmt_f64(p.mean_n_error),
                            fmt_f64(p.mean_p_error),
                            p.repetitions.to_string(),
                        ])?;
                    }
                    Ok(())
                }),
            ExperimentOutput::M20 { runs } => w
                .write_record(["seed", "n_error", "p_error", "converged", "iterations"])
                .and_then(|_| {
                    for r in runs {
                        w.write_record([
                            r.seed.to_string(),
                            fmt_f64(r.n_error),
                            fmt_f64(r.p_error),
                            r.converged.to_string(),
                            r.iterations.to_string(),
                        ])?;
                    }
                    Ok(())
                }),
        };
        let to_err = |message: String| Error::Io {
            path: "experiment table".into(),
            message,
        };
        res.map_err(|e| to_err(e.to_string()))?;
        w.flush().map_err(|e| to_err(e.to_string()))
    }
}
