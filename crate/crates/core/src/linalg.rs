//! Dense symmetric matrices and the spectral helpers built on them.
//!
//! Problem sizes here are a few hundred nodes at most, so everything is
//! stored densely and decomposed with nalgebra's symmetric eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Relative tolerance used when validating symmetry on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default threshold below which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Relative slack below zero that is still accepted as positive semidefinite.
pub const PSD_SLACK: f64 = 1e-10;

/// A dense real square matrix that is symmetric to within [`SYMMETRY_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Validates symmetry and symmetrizes away the residual rounding.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
                context: "square matrix",
            });
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("order", "matrix must be non-empty"));
        }
        let scale = m.amax().max(1.0);
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if !(gap <= SYMMETRY_TOL * scale) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        gap,
                    });
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymmetricMatrix(sym))
    }

    pub fn identity(order: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(order, order))
    }

    pub fn zeros(order: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(order, order))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.0 * x
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> Result<f64> {
        check_len(self.order(), x.len(), "quadratic form vector")?;
        Ok(x.dot(&(&self.0 * x)))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for r in &rows {
            check_len(n, r.len(), "matrix row")?;
        }
        SymmetricMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

impl From<SymmetricMatrix> for Vec<Vec<f64>> {
    fn from(m: SymmetricMatrix) -> Self {
        m.0.row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

/// Smallest eigenvalue strictly above `zero_tol`.
///
/// Fails with [`Error::NotPsd`] if any eigenvalue is below
/// `-PSD_SLACK * ‖m‖`, and with [`Error::AllZeroSpectrum`] when every
/// eigenvalue is at or below `zero_tol`.
pub fn smallest_nonzero_eigenvalue(m: &SymmetricMatrix, zero_tol: f64) -> Result<f64> {
    let ev = m.eigenvalues();
    let floor = -PSD_SLACK * m.norm().max(1.0);
    if let Some(&lowest) = ev.first() {
        if lowest < floor {
            return Err(Error::NotPsd(lowest));
        }
    }
    ev.into_iter()
        .find(|&e| e > zero_tol)
        .ok_or(Error::AllZeroSpectrum)
}

/// Singular values of a general matrix, ascending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}
