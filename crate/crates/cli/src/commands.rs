use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use graud::experiment::random_init;
use graud::io::{fmt_f64, load_instance, write_score_table, LoadOptions, LoadedInstance};
use graud::{
    check_assumptions, cross_validate, make_scenario, projection_matrix, relative_l1_error, run_experiment, solve,
    AssumptionReport, CvOptions, DesignBasis, Error, ExperimentKind, ExperimentOutput, ExperimentSettings,
    GeneratorConfig, ProbSettings, ProblemInstance, Scenario, Topology,
};
use nalgebra::DVector;
use serde::Serialize;

use crate::args::{CheckArgs, CvArgs, ExperimentArgs, InputArgs, SimulateArgs, SolveArgs};
use crate::config::{FileConfig, InputConfig, DEFAULT_FOLDS, DEFAULT_LAMBDA1_GRID, DEFAULT_LAMBDA2_GRID};
use crate::report::{ConfigEcho, RunReport, Scoring, Timing, FORMAT_VERSION};
use crate::CliError;

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

struct Prepared {
    inputs: InputConfig,
    data: LoadedInstance,
    basis: DesignBasis,
    assumptions: AssumptionReport,
}

fn prepare(file: &FileConfig, flags: &InputArgs) -> Result<Prepared, CliError> {
    let inputs = file.inputs(flags)?;
    let opts = LoadOptions {
        node_count: inputs.nodes,
        standardize: inputs.standardize,
    };
    let data = load_instance(&inputs.edges, &inputs.counts, &inputs.features, &opts)?;
    let basis = projection_matrix(&data.features)?;
    let assumptions = check_assumptions(&data.graph, &basis)?;
    Ok(Prepared { inputs, data, basis, assumptions })
}

fn violation(report: &AssumptionReport) -> Error {
    Error::AssumptionViolated(format!(
        "null(L) and null(H) intersect (separation {:e}, ones in feature span: {}); use --force to solve anyway",
        report.null_space_separation, report.ones_in_null_h
    ))
}

/// Parses `default`, `prob:<p>` or `random:<seed>` into a starting point.
fn initial_point(spec: &str, inst: &ProblemInstance) -> Result<Option<(DVector<f64>, DVector<f64>)>, CliError> {
    let bad = || CliError::Config(format!("bad --init '{spec}': expected default, prob:<p> or random:<seed>"));
    let (kind, value) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "default" if value.is_empty() => Ok(None),
        "prob" => {
            let p: f64 = value.parse().map_err(|_| bad())?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(bad());
            }
            let v = DVector::from_element(inst.len(), p.ln());
            Ok(Some((inst.y_log() - &v, v)))
        }
        "random" => {
            let seed: u64 = value.parse().map_err(|_| bad())?;
            Ok(Some(random_init(inst.y_log(), seed)))
        }
        _ => Err(bad()),
    }
}

fn score_against(path: &Path, n_hat: &[f64], p_hat: &[f64]) -> Result<Scoring, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let truth: Scenario =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let n0: Vec<f64> = truth.n0.iter().map(|&n| n as f64).collect();
    Ok(Scoring {
        n_error: relative_l1_error(n_hat, &n0)?,
        p_error: relative_l1_error(p_hat, &truth.p0)?,
    })
}

pub fn solve_cmd(file: &FileConfig, args: SolveArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let prep = prepare(file, &args.input)?;
    let load_ms = ms(start);
    let holds = prep.assumptions.assumption2_holds;
    if !holds && !args.force {
        return Err(violation(&prep.assumptions).into());
    }
    let settings = file.solver(&args.solver);
    let inst = ProblemInstance::from_counts(
        &prep.data.counts,
        settings.pseudocount,
        prep.data.graph.laplacian(),
        prep.basis.projector().clone(),
        settings.lambda1,
        settings.lambda2,
    )?;
    let init = args.init.clone().or_else(|| file.init.clone());
    let start_point = match &init {
        Some(spec) => initial_point(spec, &inst)?,
        None => None,
    };
    let solve_start = Instant::now();
    let sol = solve(&inst, &settings.solver, start_point)?;
    let solve_ms = ms(solve_start);
    let scoring = match &args.truth {
        Some(p) => Some(score_against(p, &sol.n_hat, &sol.p_hat)?),
        None => None,
    };
    let report = RunReport {
        format_version: FORMAT_VERSION,
        command: "solve".into(),
        config: ConfigEcho {
            inputs: prep.inputs,
            settings: Some(settings),
            init,
            truth: args.truth,
        },
        assumptions: prep.assumptions,
        forced: !holds,
        solution: Some(sol),
        scoring,
        timing: Timing {
            load_ms,
            solve_ms,
            total_ms: ms(start),
        },
    };
    emit(args.output.as_deref(), &report.to_json())
}

pub fn check_cmd(file: &FileConfig, args: CheckArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let prep = prepare(file, &args.input)?;
    let load_ms = ms(start);
    let holds = prep.assumptions.assumption2_holds;
    let report = RunReport {
        format_version: FORMAT_VERSION,
        command: "check".into(),
        config: ConfigEcho {
            inputs: prep.inputs,
            settings: None,
            init: None,
            truth: None,
        },
        assumptions: prep.assumptions.clone(),
        forced: false,
        solution: None,
        scoring: None,
        timing: Timing {
            load_ms,
            solve_ms: 0.0,
            total_ms: ms(start),
        },
    };
    emit(args.output.as_deref(), &report.to_json())?;
    if holds {
        Ok(())
    } else {
        Err(violation(&prep.assumptions).into())
    }
}

#[derive(Serialize)]
struct CvSelection {
    format_version: u32,
    lambda1: f64,
    lambda2: f64,
    folds: usize,
    seed: u64,
    /// Total held-out score per grid point.
    totals: Vec<GridTotal>,
    fold_of_node: Vec<usize>,
}

#[derive(Serialize)]
struct GridTotal {
    lambda1: f64,
    lambda2: f64,
    score: f64,
}

pub fn cv_cmd(file: &FileConfig, args: CvArgs) -> Result<(), CliError> {
    let prep = prepare(file, &args.input)?;
    if !prep.assumptions.assumption2_holds {
        return Err(violation(&prep.assumptions).into());
    }
    let settings = file.solver(&args.solver);
    let l1 = args
        .lambda1_grid
        .or_else(|| file.lambda1_grid.clone())
        .unwrap_or_else(|| DEFAULT_LAMBDA1_GRID.to_vec());
    let l2 = args
        .lambda2_grid
        .or_else(|| file.lambda2_grid.clone())
        .unwrap_or_else(|| DEFAULT_LAMBDA2_GRID.to_vec());
    let folds = args.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
    let seed = file.seed(args.seed)?;
    let opts = CvOptions {
        solver: settings.solver,
        pseudocount: settings.pseudocount,
    };
    let result = cross_validate(&prep.data.counts, &prep.data.graph, &prep.data.features, &l1, &l2, folds, seed, &opts)?;
    if let Some(path) = &args.scores {
        let f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        write_score_table(io::BufWriter::new(f), &result.scores)?;
    }
    let selection = CvSelection {
        format_version: FORMAT_VERSION,
        lambda1: result.lambda1,
        lambda2: result.lambda2,
        folds,
        seed,
        totals: result
            .totals()
            .into_iter()
            .map(|(lambda1, lambda2, score)| GridTotal { lambda1, lambda2, score })
            .collect(),
        fold_of_node: result.folds,
    };
    emit(args.output.as_deref(), &to_json(&selection))
}

fn parse_topology(name: &str) -> Result<Topology, CliError> {
    match name {
        "path" => Ok(Topology::Path),
        "ring" => Ok(Topology::Ring),
        "lattice" => Ok(Topology::Lattice),
        other => Err(CliError::Config(format!("unknown topology '{other}': expected path, ring or lattice"))),
    }
}

pub fn simulate_cmd(file: &FileConfig, args: SimulateArgs) -> Result<(), CliError> {
    let base = ProbSettings::default();
    let probs = ProbSettings {
        mean: args.prob_mean.unwrap_or(base.mean),
        sd: args.prob_sd.unwrap_or(base.sd),
        smoothness_cap: args.smoothness_cap.unwrap_or(base.smoothness_cap),
        max_attempts: args.max_attempts.unwrap_or(1_000_000),
        ..base
    };
    let config = GeneratorConfig {
        topology: parse_topology(args.topology.as_deref().unwrap_or("path"))?,
        probs,
        min_count: args.min_count,
        ..GeneratorConfig::default()
    };
    let seed = file.seed(args.seed)?;
    let scenario = make_scenario(args.nodes.unwrap_or(10), args.feature_count.unwrap_or(3), &config, seed)?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    write("scenario.json", to_json(&scenario))?;
    write("edges.txt", scenario.graph.to_edge_list())?;
    let mut counts = String::from("node,y\n");
    for (i, y) in scenario.y.iter().enumerate() {
        counts.push_str(&format!("{i},{y}\n"));
    }
    write("counts.csv", counts)?;
    let k = scenario.beta0.len();
    let mut features = (1..=k).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    features.push('\n');
    for row in &scenario.features {
        features.push_str(&row.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(","));
        features.push('\n');
    }
    write("features.csv", features)?;
    println!(
        "wrote scenario seed {seed} ({} nodes, min n {}, pTLp {:.6}) to {}",
        scenario.node_count(),
        scenario.n0.iter().min().copied().unwrap_or(0),
        scenario.diagnostics.smoothness,
        dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ExperimentRecord<'a> {
    format_version: u32,
    seed: u64,
    settings: &'a ExperimentSettings,
    #[serde(flatten)]
    output: &'a ExperimentOutput,
}

pub fn experiment_cmd(file: &FileConfig, args: ExperimentArgs) -> Result<(), CliError> {
    let kind: ExperimentKind = args.name.parse()?;
    let mut settings = file
        .experiment
        .clone()
        .unwrap_or_else(|| ExperimentSettings::for_kind(kind));
    if let Some(r) = args.repetitions {
        settings.repetitions = r;
    }
    if let Some(k) = args.k_max {
        settings.k_max = k;
    }
    let seed = file.seed(args.seed)?;
    let output = run_experiment(kind, &settings, seed)?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join(format!("{kind}.csv"));
    let f = fs::File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    output.write_csv(io::BufWriter::new(f))?;
    let json_path = dir.join(format!("{kind}.json"));
    let record = ExperimentRecord {
        format_version: FORMAT_VERSION,
        seed,
        settings: &settings,
        output: &output,
    };
    fs::write(&json_path, to_json(&record)).map_err(|e| CliError::io(&json_path, e))?;

    match &output {
        ExperimentOutput::Convergence { traces } => {
            for t in traces {
                println!("{}: {} rounds, terminal loss {}", t.init, t.losses.len(), fmt_f64(t.terminal_loss()));
            }
        }
        ExperimentOutput::SweepMinCount { points } | ExperimentOutput::SweepSmoothness { points } => {
            for p in points {
                println!("k={:>2} level={:.4} n_err={:.4} p_err={:.4}", p.k, p.level, p.mean_n_error, p.mean_p_error);
            }
        }
        ExperimentOutput::M20 { runs } => {
            let (n, p) = output.mean_errors().unwrap_or((f64::NAN, f64::NAN));
            println!("{} seeds: mean n_err={n:.4} p_err={p:.4}", runs.len());
        }
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}
