//! Alternating gradient descent for the log-domain debiasing problem
//!
//! ```text
//!   minimize  ‖ỹ - u - v‖² + λ₁ vᵀLv + λ₂ uᵀHu
//!   subject to u ≥ ỹ,  v ≤ 0
//! ```
//!
//! where `ỹ = log y`, `u = log n` and `v = log p`. Each outer round takes
//! `inner_iters` gradient steps on `u` with `v` frozen, then `inner_iters`
//! steps on `v` with `u` frozen.
//!
//! Updates use the half-gradients
//!
//! ```text
//!   du = u + v - ỹ + λ₂ H u
//!   dv = u + v - ỹ + λ₁ L v
//! ```
//!
//! so a step of size `η` moves `η/2` along the true gradient. The loss is
//! jointly convex; when `null(L) ∩ null(H) = {0}` it is strictly convex and
//! the minimizer is unique.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::SymmetricMatrix;

/// Loss growth factor (relative to the starting loss) treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Fraction of the curvature bound used when no step size is given.
pub const DEFAULT_STEP_FRACTION: f64 = 0.9;

/// Data and regularization weights for one estimation problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    y_log: DVector<f64>,
    laplacian: SymmetricMatrix,
    projector: SymmetricMatrix,
    lambda1: f64,
    lambda2: f64,
    /// 0/1 weights on the data-fidelity term; `None` means all ones.
    fidelity: Option<DVector<f64>>,
}

impl ProblemInstance {
    pub fn new(
        y_log: DVector<f64>,
        laplacian: SymmetricMatrix,
        projector: SymmetricMatrix,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        let m = y_log.len();
        check_len(m, laplacian.order(), "laplacian order")?;
        check_len(m, projector.order(), "projector order")?;
        for (name, lambda) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {lambda}")));
            }
        }
        if let Some(i) = y_log.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonPositiveCount {
                node: i,
                value: y_log[i].exp(),
            });
        }
        Ok(ProblemInstance {
            y_log,
            laplacian,
            projector,
            lambda1,
            lambda2,
            fidelity: None,
        })
    }

    /// Builds `ỹ = log(y + c)` from observed counts.
    ///
    /// Without a pseudocount every count must be at least 1.
    pub fn from_counts(
        counts: &[f64],
        pseudocount: Option<f64>,
        laplacian: SymmetricMatrix,
        projector: SymmetricMatrix,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        let shift = match pseudocount {
            Some(c) if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::invalid("pseudocount", format!("must be positive, got {c}")))
            }
            Some(c) => c,
            None => 0.0,
        };
        let mut y_log = DVector::zeros(counts.len());
        for (i, &y) in counts.iter().enumerate() {
            if !(y >= 0.0) || (pseudocount.is_none() && y < 1.0) {
                return Err(Error::NonPositiveCount { node: i, value: y });
            }
            y_log[i] = (y + shift).ln();
        }
        ProblemInstance::new(y_log, laplacian, projector, lambda1, lambda2)
    }

    /// Restricts the data-fidelity term to nodes where `mask` is true.
    /// The smoothness and regression penalties still cover every node.
    pub fn with_fidelity_mask(mut self, mask: &[bool]) -> Result<Self> {
        check_len(self.len(), mask.len(), "fidelity mask")?;
        self.fidelity = Some(DVector::from_iterator(
            mask.len(),
            mask.iter().map(|&keep| if keep { 1.0 } else { 0.0 }),
        ));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.y_log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_log.is_empty()
    }

    pub fn y_log(&self) -> &DVector<f64> {
        &self.y_log
    }

    pub fn laplacian(&self) -> &SymmetricMatrix {
        &self.laplacian
    }

    pub fn projector(&self) -> &SymmetricMatrix {
        &self.projector
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    fn weight(&self, i: usize) -> f64 {
        self.fidelity.as_ref().map_or(1.0, |w| w[i])
    }

    /// Step size `0.9 · 2 / (2 + λ₂ λmax(H) + λ₁ λmax(L))`.
    pub fn recommended_step_size(&self) -> f64 {
        let curvature = 2.0
            + self.lambda2 * self.projector.max_eigenvalue().max(0.0)
            + self.lambda1 * self.laplacian.max_eigenvalue().max(0.0);
        DEFAULT_STEP_FRACTION * 2.0 / curvature
    }

    fn check_point(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<()> {
        check_len(self.len(), u.len(), "u")?;
        check_len(self.len(), v.len(), "v")
    }
}

/// Settings for [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub inner_iters: usize,
    pub outer_iters: usize,
    /// `None` uses [`ProblemInstance::recommended_step_size`].
    pub step_size: Option<f64>,
    /// Stop once one outer round changes the loss by less than this.
    pub stop_threshold: f64,
    /// Clamp to `u ≥ ỹ`, `v ≤ 0` after every gradient step.
    pub project_feasible: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            inner_iters: 1,
            outer_iters: 1_000_000,
            step_size: None,
            stop_threshold: 1e-12,
            project_feasible: true,
        }
    }
}

impl SolverConfig {
    pub fn unconstrained() -> Self {
        SolverConfig {
            project_feasible: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.inner_iters == 0 {
            return Err(Error::invalid("inner_iters", "must be positive"));
        }
        if self.outer_iters == 0 {
            return Err(Error::invalid("outer_iters", "must be positive"));
        }
        if let Some(eta) = self.step_size {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::invalid("step_size", format!("must be positive, got {eta}")));
            }
        }
        if !(self.stop_threshold >= 0.0) {
            return Err(Error::invalid("stop_threshold", "must be >= 0"));
        }
        Ok(())
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Log true counts.
    pub u: Vec<f64>,
    /// Log discovery probabilities.
    pub v: Vec<f64>,
    pub n_hat: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub initial_loss: f64,
    /// Loss after each completed outer round.
    pub loss_trace: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
    pub step_size: f64,
}

impl Solution {
    pub fn u_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.u)
    }

    pub fn v_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.v)
    }

    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(self.initial_loss)
    }
}

/// `‖ỹ - u - v‖² + λ₁ vᵀLv + λ₂ uᵀHu`, with masked nodes left out of the
/// first term.
pub fn loss(u: &DVector<f64>, v: &DVector<f64>, inst: &ProblemInstance) -> Result<f64> {
    inst.check_point(u, v)?;
    Ok(loss_unchecked(u, v, inst))
}

fn loss_unchecked(u: &DVector<f64>, v: &DVector<f64>, inst: &ProblemInstance) -> f64 {
    let fidelity: f64 = (0..inst.len())
        .map(|i| inst.weight(i) * (inst.y_log[i] - u[i] - v[i]).powi(2))
        .sum();
    let smooth = v.dot(&inst.laplacian.mul_vec(v));
    let regress = u.dot(&inst.projector.mul_vec(u));
    fidelity + inst.lambda1 * smooth + inst.lambda2 * regress
}

/// Full gradients `(2(u+v-ỹ+λ₂Hu), 2(u+v-ỹ+λ₁Lv))`.
pub fn gradients(
    u: &DVector<f64>,
    v: &DVector<f64>,
    inst: &ProblemInstance,
) -> Result<(DVector<f64>, DVector<f64>)> {
    inst.check_point(u, v)?;
    let resid = weighted_residual(u, v, inst);
    let gu = (&resid + inst.projector.mul_vec(u) * inst.lambda2) * 2.0;
    let gv = (&resid + inst.laplacian.mul_vec(v) * inst.lambda1) * 2.0;
    Ok((gu, gv))
}

fn weighted_residual(u: &DVector<f64>, v: &DVector<f64>, inst: &ProblemInstance) -> DVector<f64> {
    DVector::from_fn(inst.len(), |i, _| inst.weight(i) * (u[i] + v[i] - inst.y_log[i]))
}

/// `‖u+v‖² + λ₂ uᵀHu + λ₁ vᵀLv`: the quadratic form of half the loss Hessian
/// in direction `(u, v)`.
pub fn hessian_quadratic_form(u: &DVector<f64>, v: &DVector<f64>, inst: &ProblemInstance) -> Result<f64> {
    inst.check_point(u, v)?;
    let coupled: f64 = (0..inst.len()).map(|i| inst.weight(i) * (u[i] + v[i]).powi(2)).sum();
    Ok(coupled
        + inst.lambda2 * u.dot(&inst.projector.mul_vec(u))
        + inst.lambda1 * v.dot(&inst.laplacian.mul_vec(v)))
}

/// Starting point `n₁ = y`, `p₁ = 1`, i.e. `u₁ = log y`, `v₁ = 0`.
pub fn default_init(y: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
    if let Some(i) = y.iter().position(|&c| !(c >= 1.0)) {
        return Err(Error::NonPositiveCount { node: i, value: y[i] });
    }
    let u = DVector::from_iterator(y.len(), y.iter().map(|c| c.ln()));
    Ok((u, DVector::zeros(y.len())))
}

/// Euclidean projection onto `{u ≥ ỹ, v ≤ 0}`.
pub fn project_feasible(
    u: &DVector<f64>,
    v: &DVector<f64>,
    y_log: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_len(y_log.len(), u.len(), "u")?;
    check_len(y_log.len(), v.len(), "v")?;
    let pu = u.zip_map(y_log, f64::max);
    let pv = v.map(|x| x.min(0.0));
    Ok((pu, pv))
}

/// Runs the alternating descent from `init`, or from `(ỹ, 0)` when omitted.
pub fn solve(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    init: Option<(DVector<f64>, DVector<f64>)>,
) -> Result<Solution> {
    cfg.validate()?;
    let m = inst.len();
    let (mut u, mut v) = match init {
        Some((u, v)) => {
            inst.check_point(&u, &v)?;
            (u, v)
        }
        None => (inst.y_log.clone(), DVector::zeros(m)),
    };
    let eta = cfg.step_size.unwrap_or_else(|| inst.recommended_step_size());

    let h = inst.projector.as_matrix();
    let l = inst.laplacian.as_matrix();
    let weights = inst.fidelity.clone().unwrap_or_else(|| DVector::from_element(m, 1.0));
    // Lower bounds apply only where the data term is active.
    let lower: Vec<f64> = (0..m)
        .map(|i| if weights[i] > 0.0 { inst.y_log[i] } else { f64::NEG_INFINITY })
        .collect();
    let mut buf = DVector::zeros(m);

    let initial_loss = loss_unchecked(&u, &v, inst);
    if !initial_loss.is_finite() {
        return Err(Error::NonFiniteIterate(0));
    }
    let blowup = DIVERGENCE_FACTOR * initial_loss.max(f64::EPSILON);
    let mut trace = Vec::with_capacity(cfg.outer_iters.min(1 << 16));
    let mut previous = initial_loss;
    let mut converged = false;

    for round in 1..=cfg.outer_iters {
        for _ in 0..cfg.inner_iters {
            buf.gemv(inst.lambda2, h, &u, 0.0);
            for i in 0..m {
                let du = weights[i] * (u[i] + v[i] - inst.y_log[i]) + buf[i];
                u[i] -= eta * du;
                if cfg.project_feasible && u[i] < lower[i] {
                    u[i] = lower[i];
                }
            }
        }
        for _ in 0..cfg.inner_iters {
            buf.gemv(inst.lambda1, l, &v, 0.0);
            for i in 0..m {
                let dv = weights[i] * (u[i] + v[i] - inst.y_log[i]) + buf[i];
                v[i] -= eta * dv;
                if cfg.project_feasible && v[i] > 0.0 {
                    v[i] = 0.0;
                }
            }
        }
        let current = loss_unchecked(&u, &v, inst);
        if !current.is_finite() || u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteIterate(round));
        }
        if current > blowup {
            return Err(Error::DivergedLoss {
                loss: current,
                initial: initial_loss,
            });
        }
        trace.push(current);
        if (previous - current).abs() < cfg.stop_threshold {
            converged = true;
            break;
        }
        previous = current;
    }

    let iterations_used = trace.len();
    Ok(Solution {
        n_hat: u.iter().map(|x| x.exp()).collect(),
        p_hat: v.iter().map(|x| x.exp()).collect(),
        u: u.iter().copied().collect(),
        v: v.iter().copied().collect(),
        initial_loss,
        loss_trace: trace,
        converged,
        iterations_used,
        step_size: eta,
    })
}
