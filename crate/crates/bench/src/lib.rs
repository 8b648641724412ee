//! Benchmark fixtures.

use graud::{make_scenario, projection_matrix, GeneratorConfig, ProbSettings, ProblemInstance, Scenario, Topology};

pub const LAMBDA1: f64 = 0.01;
pub const LAMBDA2: f64 = 0.9;
pub const FEATURES: usize = 3;

/// A path-graph scenario of `m` nodes. The smoothness cap is effectively
/// off so that generation time does not grow with `m`.
pub fn scenario(m: usize, seed: u64) -> Scenario {
    let generator = GeneratorConfig {
        topology: Topology::Path,
        probs: ProbSettings { sd: 0.05, smoothness_cap: 1e9, ..ProbSettings::default() },
        ..GeneratorConfig::default()
    };
    make_scenario(m, FEATURES, &generator, seed).expect("fixture scenario")
}

pub fn instance(s: &Scenario) -> ProblemInstance {
    let basis = projection_matrix(&s.feature_matrix()).expect("fixture design");
    let pseudocount = s.has_zero_counts().then_some(0.5);
    ProblemInstance::from_counts(
        &s.counts_f64(),
        pseudocount,
        s.graph.laplacian(),
        basis.projector().clone(),
        LAMBDA1,
        LAMBDA2,
    )
    .expect("fixture instance")
}
