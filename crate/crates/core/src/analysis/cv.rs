//! K-fold selection of `(λ₁, λ₂)`.
//!
//! Each fold hides a subset of nodes from the data-fidelity term only; the
//! smoothness and regression penalties still see the whole graph, so the
//! held-out `u + v` is an interpolation from the neighbours and the
//! feature model. The score of a fold is `Σ_held-out (ỹ_i - u_i - v_i)²`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::design::projection_matrix;
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::solver::{solve, ProblemInstance, Solution, SolverConfig};
use crate::synth::stream_rng;

const STREAM_FOLDS: u64 = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CvOptions {
    pub solver: SolverConfig,
    pub pseudocount: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub lambda1: f64,
    pub lambda2: f64,
    pub fold: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda1: f64,
    pub lambda2: f64,
    /// One row per (grid point, fold), grid in row-major `λ₁ x λ₂` order.
    pub scores: Vec<CvScore>,
    /// Fold index of every node.
    pub folds: Vec<usize>,
}

impl CvResult {
    /// Summed score over folds for each grid point.
    pub fn totals(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for s in &self.scores {
            match out.last_mut() {
                Some(last) if last.0 == s.lambda1 && last.1 == s.lambda2 => last.2 += s.score,
                _ => out.push((s.lambda1, s.lambda2, s.score)),
            }
        }
        out
    }
}

/// Shuffles nodes with `seed` and deals them round-robin into `folds` folds.
pub fn fold_assignment(node_count: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("folds", format!("need at least 2, got {folds}")));
    }
    if folds > node_count {
        return Err(Error::FoldTooSmall {
            fold: node_count,
            folds,
            nodes: node_count,
        });
    }
    let mut order: Vec<usize> = (0..node_count).collect();
    order.shuffle(&mut stream_rng(seed, STREAM_FOLDS));
    let mut assignment = vec![0; node_count];
    for (rank, node) in order.into_iter().enumerate() {
        assignment[node] = rank % folds;
    }
    Ok(assignment)
}

/// Held-out squared residual of a fitted solution.
pub(crate) fn held_out_score(inst: &ProblemInstance, sol: &Solution, held_out: &[bool]) -> f64 {
    (0..inst.len())
        .filter(|&i| held_out[i])
        .map(|i| (inst.y_log()[i] - sol.u[i] - sol.v[i]).powi(2))
        .sum()
}

#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    counts: &[f64],
    graph: &Graph,
    features: &DMatrix<f64>,
    lambda1_grid: &[f64],
    lambda2_grid: &[f64],
    folds: usize,
    seed: u64,
    opts: &CvOptions,
) -> Result<CvResult> {
    let m = graph.node_count();
    check_len(m, counts.len(), "counts")?;
    check_len(m, features.nrows(), "feature rows")?;
    if lambda1_grid.is_empty() || lambda2_grid.is_empty() {
        return Err(Error::invalid("grid", "lambda grids must be non-empty"));
    }
    let assignment = fold_assignment(m, folds, seed)?;
    let basis = projection_matrix(features)?;
    let laplacian = graph.laplacian();

    let mut scores = Vec::with_capacity(lambda1_grid.len() * lambda2_grid.len() * folds);
    let mut best: Option<(f64, f64, f64)> = None;
    for &l1 in lambda1_grid {
        for &l2 in lambda2_grid {
            let base = ProblemInstance::from_counts(
                counts,
                opts.pseudocount,
                laplacian.clone(),
                basis.projector().clone(),
                l1,
                l2,
            )?;
            let mut total = 0.0;
            for fold in 0..folds {
                let held_out: Vec<bool> = assignment.iter().map(|&f| f == fold).collect();
                let train: Vec<bool> = held_out.iter().map(|h| !h).collect();
                let inst = base.clone().with_fidelity_mask(&train)?;
                let sol = solve(&inst, &opts.solver, None)?;
                let score = held_out_score(&inst, &sol, &held_out);
                total += score;
                scores.push(CvScore { lambda1: l1, lambda2: l2, fold, score });
            }
            let better = match best {
                None => true,
                Some((b1, b2, bt)) => total < bt || (total == bt && (l1, l2) < (b1, b2)),
            };
            if better {
                best = Some((l1, l2, total));
            }
        }
    }
    let (lambda1, lambda2, _) = best.expect("grids are non-empty");
    Ok(CvResult { lambda1, lambda2, scores, folds: assignment })
}
