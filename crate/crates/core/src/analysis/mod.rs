//! Diagnostics around a fitted solution: accuracy metrics, the recovery
//! bound, binomial concentration checks and regularization selection.

mod bounds;
mod concentration;
mod cv;

pub use bounds::{recovery_bound, recovery_bound_for, RecoveryBound};
pub use concentration::{
    chernoff_check, chernoff_tail_bounds, concentration_check, ChernoffCheck, ConcentrationReport, TailBound,
};
pub use cv::{cross_validate, fold_assignment, CvOptions, CvResult, CvScore};

use crate::error::{check_len, Error, Result};

/// `‖estimate - truth‖₁ / ‖truth‖₁`.
pub fn relative_l1_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), estimate.len(), "estimate")?;
    let norm: f64 = truth.iter().map(|t| t.abs()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroTruthNorm);
    }
    let diff: f64 = estimate.iter().zip(truth).map(|(e, t)| (e - t).abs()).sum();
    Ok(diff / norm)
}
