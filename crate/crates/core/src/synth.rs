//! Seeded synthetic scenarios: features, log-linear true counts, smooth
//! discovery probabilities and binomial observations.
//!
//! Every random draw comes from a ChaCha8 generator seeded with the
//! scenario seed, with a separate stream per component (features, count
//! noise, probabilities, observations). Re-running a component alone with
//! the same seed reproduces exactly what [`make_scenario`] produced for it.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::design::projection_matrix;
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;

const STREAM_FEATURES: u64 = 1;
const STREAM_COUNT_NOISE: u64 = 2;
const STREAM_PROBS: u64 = 3;
const STREAM_OBSERVATIONS: u64 = 4;

/// Feature redraws allowed while looking for a usable count-shift direction.
const MAX_FEATURE_REDRAWS: usize = 1_000;

/// Smallest entry allowed in the count-shift direction (see [`make_scenario`]).
const MIN_SHIFT_WEIGHT: f64 = 0.5;

/// Largest `log n` that will be rounded to an integer count.
const MAX_LOG_COUNT: f64 = 34.0;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Graph layout for generated scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Topology {
    #[default]
    Path,
    Ring,
    /// Near-square 4-neighbour lattice: rows = largest divisor of M not above √M.
    Lattice,
    Custom { edges: Vec<(usize, usize)> },
}

impl Topology {
    pub fn build(&self, node_count: usize) -> Result<Graph> {
        match self {
            Topology::Path => Graph::path(node_count),
            Topology::Ring => Graph::ring(node_count),
            Topology::Lattice => {
                let rows = (1..=node_count)
                    .take_while(|r| r * r <= node_count)
                    .filter(|r| node_count % r == 0)
                    .last()
                    .unwrap_or(1);
                Graph::grid(rows, node_count / rows)
            }
            Topology::Custom { edges } => Graph::new(node_count, edges.iter().copied()),
        }
    }
}

/// How discovery probabilities are drawn: `p = clip(mean + sd·ε)`,
/// redrawn until `pᵀLp ≤ smoothness_cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbSettings {
    pub mean: f64,
    pub sd: f64,
    pub clip: (f64, f64),
    pub smoothness_cap: f64,
    pub max_attempts: usize,
}

impl Default for ProbSettings {
    fn default() -> Self {
        ProbSettings {
            mean: 0.7,
            sd: 0.1,
            clip: (0.05, 0.95),
            smoothness_cap: 0.02,
            max_attempts: 10_000,
        }
    }
}

impl ProbSettings {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.clip;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::invalid("clip", format!("need 0 < lo < hi < 1, got ({lo}, {hi})")));
        }
        if !(self.smoothness_cap > 0.0) {
            return Err(Error::invalid("smoothness_cap", "must be positive"));
        }
        if !(self.sd >= 0.0 && self.mean.is_finite()) {
            return Err(Error::invalid("sd", "must be non-negative with a finite mean"));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("max_attempts", "must be positive"));
        }
        Ok(())
    }
}

/// An accepted probability field and the number of draws it took.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbField {
    pub p: Vec<f64>,
    pub attempts: usize,
    pub smoothness: f64,
}

/// Generator settings for [`make_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub topology: Topology,
    pub probs: ProbSettings,
    /// Coefficients of the log-linear count model; `None` means all ones.
    pub beta: Option<Vec<f64>>,
    /// Standard deviation of Gaussian noise added to `Xβ` before rounding.
    pub count_noise_sd: f64,
    /// Shift the log-counts so that the smallest true count equals this.
    pub min_count: Option<u64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            topology: Topology::Path,
            probs: ProbSettings::default(),
            beta: None,
            count_noise_sd: 0.0,
            min_count: None,
        }
    }
}

/// Assumption-1 style diagnostics of the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDiagnostics {
    /// `n₀ᵀ H n₀`.
    pub counts_residual: f64,
    /// `u₀ᵀ H u₀` with `u₀ = log n₀`.
    pub eps_u: f64,
    /// `v₀ᵀ L v₀` with `v₀ = log p₀`.
    pub eps_v: f64,
    /// `p₀ᵀ L p₀`.
    pub smoothness: f64,
    pub prob_attempts: usize,
}

/// Ground truth plus observations for one synthetic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub config: GeneratorConfig,
    pub graph: Graph,
    /// Feature matrix, one row per node.
    pub features: Vec<Vec<f64>>,
    pub beta0: Vec<f64>,
    /// Offset applied along the feature-space projection of the ones vector.
    pub count_shift: f64,
    pub n0: Vec<u64>,
    pub p0: Vec<f64>,
    pub y: Vec<u64>,
    pub diagnostics: ScenarioDiagnostics,
}

impl Scenario {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn feature_matrix(&self) -> DMatrix<f64> {
        let m = self.features.len();
        let k = self.features.first().map_or(0, Vec::len);
        DMatrix::from_fn(m, k, |i, j| self.features[i][j])
    }

    pub fn true_log_counts(&self) -> DVector<f64> {
        DVector::from_iterator(self.n0.len(), self.n0.iter().map(|&n| (n as f64).ln()))
    }

    pub fn true_log_probs(&self) -> DVector<f64> {
        DVector::from_iterator(self.p0.len(), self.p0.iter().map(|p| p.ln()))
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.y.iter().map(|&y| y as f64).collect()
    }

    pub fn has_zero_counts(&self) -> bool {
        self.y.contains(&0)
    }

    /// Checks the type invariants; every generated scenario satisfies them.
    pub fn validate(&self) -> Result<()> {
        let m = self.node_count();
        check_len(m, self.features.len(), "feature rows")?;
        check_len(m, self.n0.len(), "n0")?;
        check_len(m, self.p0.len(), "p0")?;
        check_len(m, self.y.len(), "y")?;
        let (lo, hi) = self.config.probs.clip;
        if let Some(i) = self.p0.iter().position(|&p| !(lo..=hi).contains(&p)) {
            return Err(Error::InvalidProbability { index: i, value: self.p0[i] });
        }
        if let Some(i) = self.n0.iter().position(|&n| n == 0) {
            return Err(Error::invalid("n0", format!("true count at node {i} is zero")));
        }
        if let Some(i) = self.y.iter().zip(&self.n0).position(|(y, n)| y > n) {
            return Err(Error::invalid("y", format!("observation exceeds true count at node {i}")));
        }
        let p = DVector::from_column_slice(&self.p0);
        if self.graph.laplacian_quadratic(&p)? > self.config.probs.smoothness_cap {
            return Err(Error::invalid("p0", "smoothness cap exceeded"));
        }
        Ok(())
    }
}

fn check_shape(m: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("K", "need at least one feature"));
    }
    if k >= m {
        return Err(Error::FullRowRank { rows: m, rank: k.min(m) });
    }
    Ok(())
}

fn draw_features(m: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(m, k, |_, _| 2.0 + rng.sample::<f64, _>(StandardNormal))
}

/// `X = 2 + Z` with `Z` standard normal, `M x K`, `K < M`.
pub fn generate_features(m: usize, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_shape(m, k)?;
    Ok(draw_features(m, k, &mut stream_rng(seed, STREAM_FEATURES)))
}

/// Rejection-samples a probability field satisfying the smoothness cap.
pub fn generate_probs(graph: &Graph, settings: &ProbSettings, seed: u64) -> Result<ProbField> {
    settings.validate()?;
    let mut rng = stream_rng(seed, STREAM_PROBS);
    let (lo, hi) = settings.clip;
    let mut p = DVector::zeros(graph.node_count());
    for attempt in 1..=settings.max_attempts {
        for x in p.iter_mut() {
            let eps: f64 = rng.sample(StandardNormal);
            *x = (settings.mean + settings.sd * eps).clamp(lo, hi);
        }
        let smoothness = graph.laplacian_quadratic(&p)?;
        if smoothness <= settings.smoothness_cap {
            return Ok(ProbField {
                p: p.iter().copied().collect(),
                attempts: attempt,
                smoothness,
            });
        }
    }
    Err(Error::SmoothnessUnreachable {
        cap: settings.smoothness_cap,
        attempts: settings.max_attempts,
    })
}

/// Independent `Binomial(n_i, p_i)` draws.
pub fn sample_binomial_vector(n: &[u64], p: &[f64], seed: u64) -> Result<Vec<u64>> {
    check_len(n.len(), p.len(), "probabilities")?;
    let mut rng = stream_rng(seed, STREAM_OBSERVATIONS);
    n.iter()
        .zip(p)
        .enumerate()
        .map(|(i, (&trials, &prob))| {
            let dist = Binomial::new(trials, prob).map_err(|_| Error::InvalidProbability { index: i, value: prob })?;
            Ok(dist.sample(&mut rng))
        })
        .collect()
}

/// Composes features, counts, probabilities and observations.
///
/// With `min_count = Some(k)`, the log-counts are shifted by `c·w` where
/// `w` is the projection of the ones vector onto the feature span; `c` is
/// the smallest offset making the minimum rounded count exactly `k`. The
/// shift stays inside `col(X)`, so `u₀ᵀHu₀` is unchanged. Feature draws
/// whose `w` has an entry below 0.5 are redrawn to keep the shift well
/// conditioned.
pub fn make_scenario(m: usize, k: usize, config: &GeneratorConfig, seed: u64) -> Result<Scenario> {
    check_shape(m, k)?;
    let graph = config.topology.build(m)?;
    let beta0 = match &config.beta {
        Some(b) => {
            check_len(k, b.len(), "beta")?;
            b.clone()
        }
        None => vec![1.0; k],
    };
    if !(config.count_noise_sd >= 0.0) {
        return Err(Error::invalid("count_noise_sd", "must be >= 0"));
    }
    if config.min_count == Some(0) {
        return Err(Error::invalid("min_count", "must be at least 1"));
    }

    let mut feature_rng = stream_rng(seed, STREAM_FEATURES);
    let ones = DVector::from_element(m, 1.0);
    let (features, basis, shift_dir) = {
        let mut redraws = 0;
        loop {
            let x = draw_features(m, k, &mut feature_rng);
            let basis = projection_matrix(&x);
            if let (Ok(basis), Some(_)) = (&basis, config.min_count) {
                let q = basis.column_space();
                let w = q * (q.transpose() * &ones);
                if w.min() >= MIN_SHIFT_WEIGHT {
                    break (x, basis.clone(), Some(w));
                }
            } else if config.min_count.is_none() {
                break (x, basis?, None);
            }
            redraws += 1;
            if redraws >= MAX_FEATURE_REDRAWS {
                return Err(Error::invalid(
                    "features",
                    "could not draw features with a usable count-shift direction",
                ));
            }
        }
    };

    let mut log_mean = &features * DVector::from_column_slice(&beta0);
    if config.count_noise_sd > 0.0 {
        let mut noise_rng = stream_rng(seed, STREAM_COUNT_NOISE);
        for x in log_mean.iter_mut() {
            *x += config.count_noise_sd * noise_rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut count_shift = 0.0;
    if let (Some(target), Some(w)) = (config.min_count, &shift_dir) {
        let goal = (target as f64).ln();
        count_shift = (0..m)
            .map(|i| (goal - log_mean[i]) / w[i])
            .fold(f64::NEG_INFINITY, f64::max);
        log_mean += w * count_shift;
    }
    let n0 = log_mean
        .iter()
        .map(|&x| {
            if x > MAX_LOG_COUNT || !x.is_finite() {
                Err(Error::CountOverflow(x))
            } else {
                Ok((x.exp().round() as u64).max(1))
            }
        })
        .collect::<Result<Vec<u64>>>()?;

    let field = generate_probs(&graph, &config.probs, seed)?;
    let y = sample_binomial_vector(&n0, &field.p, seed)?;

    let h = basis.projector();
    let laplacian = graph.laplacian();
    let n_vec = DVector::from_iterator(m, n0.iter().map(|&n| n as f64));
    let u0 = n_vec.map(f64::ln);
    let v0 = DVector::from_iterator(m, field.p.iter().map(|p| p.ln()));
    let diagnostics = ScenarioDiagnostics {
        counts_residual: h.quadratic_form(&n_vec)?,
        eps_u: h.quadratic_form(&u0)?,
        eps_v: laplacian.quadratic_form(&v0)?,
        smoothness: field.smoothness,
        prob_attempts: field.attempts,
    };

    let scenario = Scenario {
        seed,
        config: config.clone(),
        graph,
        features: features.row_iter().map(|r| r.iter().copied().collect()).collect(),
        beta0,
        count_shift,
        n0,
        p0: field.p,
        y,
        diagnostics,
    };
    scenario.validate()?;
    Ok(scenario)
}
