//! Feature design: the residual projector `H = I - X(XᵀX)⁻¹Xᵀ` and the
//! checks that make count/probability separation identifiable.
//!
//! `uᵀ H u` is the least-squares residual energy of `u` regressed on the
//! feature columns, so penalizing it pulls the log-counts toward a
//! log-linear model without estimating the coefficients explicitly.
//!
//! Identifiability needs `null(L) ∩ null(H) = {0}`: otherwise some nonzero
//! `w` could be added to the log-counts and subtracted from the log
//! probabilities at no cost.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::linalg::{singular_values, smallest_nonzero_eigenvalue, SymmetricMatrix, DEFAULT_ZERO_TOL};

/// Relative singular-value cutoff used for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Threshold on `delta1` (and on the null-space separation) below which the
/// identifiability condition is treated as failed.
pub const IDENTIFIABILITY_TOL: f64 = 1e-8;

/// Feature matrix together with its residual projector.
#[derive(Debug, Clone)]
pub struct DesignBasis {
    features: DMatrix<f64>,
    /// Orthonormal basis of the column space of `features`.
    basis: DMatrix<f64>,
    projector: SymmetricMatrix,
    column_rank: usize,
}

impl DesignBasis {
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn projector(&self) -> &SymmetricMatrix {
        &self.projector
    }

    pub fn column_rank(&self) -> usize {
        self.column_rank
    }

    pub fn order(&self) -> usize {
        self.features.nrows()
    }

    /// Orthonormal basis of `col(X)`; this is `null(H)`.
    pub fn column_space(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Least-squares coefficients `argmin_β ‖w - Xβ‖²`.
    pub fn regression_coefficients(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.order(), w.len(), "regression target")?;
        let xtx = self.features.transpose() * &self.features;
        let rhs = self.features.transpose() * w;
        xtx.cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or(Error::RankDeficientColumns { ratio: 0.0 })
    }

    /// `w - Xβ*`, the regression residual; equals `H w`.
    pub fn residual(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        let beta = self.regression_coefficients(w)?;
        Ok(w - &self.features * beta)
    }
}

/// Builds `H` from the feature matrix.
///
/// Fails if the columns are numerically dependent, or if `X` has full row
/// rank (then `H = 0` and the log-linear model carries no information).
pub fn projection_matrix(features: &DMatrix<f64>) -> Result<DesignBasis> {
    let (m, k) = features.shape();
    if m == 0 || k == 0 {
        return Err(Error::invalid("features", "feature matrix must have at least one row and column"));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features", "non-finite entry"));
    }
    let sv = singular_values(features);
    let top = sv.last().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    if rank == m {
        return Err(Error::FullRowRank { rows: m, rank });
    }
    if rank < k || top == 0.0 {
        let ratio = if top > 0.0 { sv[0] / top } else { 0.0 };
        return Err(Error::RankDeficientColumns { ratio });
    }
    let q = features.clone().qr().q();
    let h = DMatrix::identity(m, m) - &q * q.transpose();
    Ok(DesignBasis {
        features: features.clone(),
        basis: q,
        projector: SymmetricMatrix::new(h)?,
        column_rank: rank,
    })
}

/// Smallest singular value of the `M x 2M` block matrix `[L H]`.
pub fn delta1(laplacian: &SymmetricMatrix, projector: &SymmetricMatrix) -> Result<f64> {
    let m = laplacian.order();
    check_len(m, projector.order(), "projector order")?;
    let mut block = DMatrix::zeros(m, 2 * m);
    block.view_mut((0, 0), (m, m)).copy_from(laplacian.as_matrix());
    block.view_mut((0, m), (m, m)).copy_from(projector.as_matrix());
    Ok(singular_values(&block)[0])
}

/// Outcome of the identifiability diagnostics for a (graph, design) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub connected: bool,
    pub component_count: usize,
    /// `H·1 ≈ 0`, i.e. the constant vector lies in the feature span.
    pub ones_in_null_h: bool,
    pub assumption2_holds: bool,
    /// Reported as exactly 0 when the null spaces intersect.
    pub delta1: f64,
    /// `None` for an edgeless graph.
    pub lambda_min_l: Option<f64>,
    pub lambda_min_h: Option<f64>,
    /// Smallest singular value of `H C`, `C` an orthonormal basis of `null(L)`.
    pub null_space_separation: f64,
}

/// Checks `null(L) ∩ null(H) = {0}` and fills in the spectral constants
/// the recovery bound needs.
///
/// For a connected graph this reduces to `‖H·1‖ > 1e-8·√M`. Otherwise the
/// normalized component indicators span `null(L)` and the condition holds
/// iff `H` keeps every nonzero combination of them away from zero.
pub fn check_assumptions(graph: &Graph, basis: &DesignBasis) -> Result<AssumptionReport> {
    let m = graph.node_count();
    check_len(m, basis.order(), "design rows")?;
    let laplacian = graph.laplacian();
    let h = basis.projector();

    let ones = DVector::from_element(m, 1.0);
    let h_ones = h.mul_vec(&ones).norm();
    let ones_in_null_h = h_ones <= IDENTIFIABILITY_TOL * (m as f64).sqrt();

    let labels = graph.component_labels();
    let components = labels.iter().max().map_or(0, |x| x + 1);
    let mut indicators = DMatrix::zeros(m, components);
    for (node, &c) in labels.iter().enumerate() {
        indicators[(node, c)] = 1.0;
    }
    for mut col in indicators.column_iter_mut() {
        let n = col.norm();
        col /= n;
    }
    let separation = singular_values(&(h.as_matrix() * &indicators))[0];
    let assumption2_holds = separation > IDENTIFIABILITY_TOL;

    let raw_delta1 = delta1(&laplacian, h)?;
    let delta1 = if assumption2_holds { raw_delta1 } else { 0.0 };

    let lambda_min = |s: &SymmetricMatrix| match smallest_nonzero_eigenvalue(s, DEFAULT_ZERO_TOL) {
        Ok(v) => Ok(Some(v)),
        Err(Error::AllZeroSpectrum) => Ok(None),
        Err(e) => Err(e),
    };

    Ok(AssumptionReport {
        connected: components == 1,
        component_count: components,
        ones_in_null_h,
        assumption2_holds,
        delta1,
        lambda_min_l: lambda_min(&laplacian)?,
        lambda_min_h: lambda_min(h)?,
        null_space_separation: separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn two_node_constant_column() {
        let b = projection_matrix(&col(&[1.0, 1.0])).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert_abs_diff_eq!(b.projector().as_matrix(), &expected, epsilon = 1e-14);
    }

    #[test]
    fn annihilates_feature_column() {
        let x = col(&[1.0, 2.0, 3.0]);
        let b = projection_matrix(&x).unwrap();
        let hx = b.projector().as_matrix() * &x;
        assert!(hx.amax() < 1e-12);
        assert_eq!(b.column_rank(), 1);
    }

    #[test]
    fn square_invertible_is_full_row_rank() {
        let x = DMatrix::from_row_slice(3, 3, &[2., 0., 1., 0., 1., 0., 1., 0., 3.]);
        assert!(matches!(projection_matrix(&x), Err(Error::FullRowRank { rows: 3, rank: 3 })));
    }

    #[test]
    fn dependent_columns_rejected() {
        let x = DMatrix::from_row_slice(4, 2, &[1., 2., 2., 4., 3., 6., 4., 8.]);
        assert!(matches!(projection_matrix(&x), Err(Error::RankDeficientColumns { .. })));
    }

    #[test]
    fn assumption_on_p3() {
        let g = Graph::path(3).unwrap();
        let good = check_assumptions(&g, &projection_matrix(&col(&[1., 2., 3.])).unwrap()).unwrap();
        assert!(good.assumption2_holds);
        assert!(good.connected);
        assert!(good.delta1 > 0.0);
        assert_abs_diff_eq!(good.lambda_min_l.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(good.lambda_min_h.unwrap(), 1.0, epsilon = 1e-12);

        let bad = check_assumptions(&g, &projection_matrix(&col(&[1., 1., 1.])).unwrap()).unwrap();
        assert!(!bad.assumption2_holds);
        assert!(bad.ones_in_null_h);
        assert_eq!(bad.delta1, 0.0);
    }

    #[test]
    fn disconnected_graph_uses_component_indicators() {
        // Components {0,1} and {2,3}; X spans the first indicator.
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let x = col(&[1., 1., 0., 0.]);
        let r = check_assumptions(&g, &projection_matrix(&x).unwrap()).unwrap();
        assert!(!r.connected);
        assert!(!r.ones_in_null_h);
        assert!(!r.assumption2_holds);

        let x = col(&[1., 2., 0., 5.]);
        let r = check_assumptions(&g, &projection_matrix(&x).unwrap()).unwrap();
        assert!(r.assumption2_holds);
        assert!(r.delta1 > 1e-8);
    }

    #[test]
    fn delta1_trivial_cases() {
        let id = SymmetricMatrix::identity(3);
        let z = SymmetricMatrix::zeros(3);
        assert_abs_diff_eq!(delta1(&id, &z).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(delta1(&z, &z).unwrap(), 0.0, epsilon = 1e-14);
        assert!(delta1(&id, &SymmetricMatrix::zeros(2)).is_err());
    }

    #[test]
    fn residual_matches_projector() {
        let x = DMatrix::from_row_slice(5, 2, &[1., 0.3, 2., -1., 0.5, 0.2, 3., 3., -1., 0.]);
        let b = projection_matrix(&x).unwrap();
        let w = DVector::from_vec(vec![0.4, -2.0, 1.5, 0.0, 3.3]);
        let r = b.residual(&w).unwrap();
        let hw = b.projector().quadratic_form(&w).unwrap();
        assert!((r.norm_squared() - hw).abs() <= 1e-9 * hw);
    }
}
