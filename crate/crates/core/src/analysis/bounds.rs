use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::design::delta1;
use crate::error::{check_len, Error, Result};
use crate::linalg::{smallest_nonzero_eigenvalue, DEFAULT_ZERO_TOL};
use crate::solver::ProblemInstance;
use crate::synth::Scenario;

/// Below this `delta1` the recovery bound is undefined.
const DELTA1_FLOOR: f64 = 1e-10;

/// Upper bounds on `‖u* - u₀‖²` and `‖v* - v₀‖²`.
///
/// ```text
///   c₀      = 2 + 1/√(λ₁ λmin(L)) + 1/√(λ₂ λmin(H))
///   bound_u = (2/δ₁) c₀² ‖ε_y‖² + ε_u / λmin(H)
///   bound_v = (2/δ₁) c₀² ‖ε_y‖² + ε_v / λmin(L)
/// ```
///
/// with `ε_y = ỹ - u₀ - v₀`, `ε_u = u₀ᵀHu₀`, `ε_v = v₀ᵀLv₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryBound {
    pub eps_y_sq: f64,
    pub eps_u: f64,
    pub eps_v: f64,
    pub delta1: f64,
    pub lambda_min_l: f64,
    pub lambda_min_h: f64,
    pub c0: f64,
    pub bound_u: f64,
    pub bound_v: f64,
}

/// Evaluates the bound for the scenario's ground truth against `inst`.
pub fn recovery_bound(scenario: &Scenario, inst: &ProblemInstance) -> Result<RecoveryBound> {
    recovery_bound_for(&scenario.true_log_counts(), &scenario.true_log_probs(), inst)
}

pub fn recovery_bound_for(u0: &DVector<f64>, v0: &DVector<f64>, inst: &ProblemInstance) -> Result<RecoveryBound> {
    check_len(inst.len(), u0.len(), "u0")?;
    check_len(inst.len(), v0.len(), "v0")?;
    let (l1, l2) = (inst.lambda1(), inst.lambda2());
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::invalid("lambda", "recovery bound needs lambda1, lambda2 > 0"));
    }
    let l = inst.laplacian();
    let h = inst.projector();
    let d1 = delta1(l, h)?;
    if d1 <= DELTA1_FLOOR {
        return Err(Error::AssumptionViolated(format!(
            "delta1 = {d1:e}: null(L) and null(H) intersect"
        )));
    }
    let spectral_gap = |name: &str, m| {
        smallest_nonzero_eigenvalue(m, DEFAULT_ZERO_TOL).map_err(|e| match e {
            Error::AllZeroSpectrum => Error::AssumptionViolated(format!("{name} has no nonzero eigenvalue")),
            other => other,
        })
    };
    let lambda_min_l = spectral_gap("L", l)?;
    let lambda_min_h = spectral_gap("H", h)?;

    let eps_y = inst.y_log() - u0 - v0;
    let eps_y_sq = eps_y.norm_squared();
    let eps_u = h.quadratic_form(u0)?.max(0.0);
    let eps_v = l.quadratic_form(v0)?.max(0.0);
    let c0 = 2.0 + 1.0 / (l1 * lambda_min_l).sqrt() + 1.0 / (l2 * lambda_min_h).sqrt();
    let noise_term = 2.0 / d1 * c0 * c0 * eps_y_sq;
    Ok(RecoveryBound {
        eps_y_sq,
        eps_u,
        eps_v,
        delta1: d1,
        lambda_min_l,
        lambda_min_h,
        c0,
        bound_u: noise_term + eps_u / lambda_min_h,
        bound_v: noise_term + eps_v / lambda_min_l,
    })
}
