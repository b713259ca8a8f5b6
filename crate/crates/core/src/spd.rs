//! Symmetric nonnegative-definite matrices and their square roots.

use crate::error::{CoreError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Tolerance on |A − Aᵀ|_max for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues below −EIGEN_CLAMP_TOL (scaled) are rejected; small negatives
/// inside the band are clamped to zero.
pub const EIGEN_CLAMP_TOL: f64 = 1e-10;

/// A symmetric matrix with spectrum nonnegative up to the clamp tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(CoreError::Matrix(format!(
                "expected square nonempty matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let max_asym = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
            .fold(0.0_f64, f64::max);
        if max_asym > SYMMETRY_TOL * scale.max(1.0) {
            return Err(CoreError::Matrix(format!(
                "matrix is not symmetric (max asymmetry {max_asym:e})"
            )));
        }
        // Work with the symmetrized matrix so eigensolves see an exactly
        // symmetric input.
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -EIGEN_CLAMP_TOL * scale.max(1.0) {
            return Err(CoreError::Matrix(format!(
                "matrix is indefinite beyond clamp tolerance (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(SpdMatrix { m: sym })
    }

    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(CoreError::Size {
                left: rows.len(),
                right: dim * dim,
                context: "matrix data length",
            });
        }
        SpdMatrix::new(DMatrix::from_row_slice(dim, dim, rows))
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Result<Self> {
        SpdMatrix::new(DMatrix::identity(dim, dim) * s)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        SpdMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            diag,
        )))
    }

    /// a = σσᵀ for a general square factor σ.
    pub fn from_factor(sigma: &DMatrix<f64>) -> Result<Self> {
        SpdMatrix::new(sigma * sigma.transpose())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Row-major entries.
    pub fn to_rows(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| self.m[(i, j)]))
            .collect()
    }

    /// Symmetric square root via eigendecomposition, eigenvalues clamped at 0.
    pub fn sqrt(&self) -> DMatrix<f64> {
        let eig = self.m.clone().symmetric_eigen();
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            *v = v.max(0.0).sqrt();
        }
        &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
    }

    /// tr(m^{1/2}) with clamped spectrum.
    pub fn trace_sqrt(&self) -> f64 {
        let eig = self.m.clone().symmetric_eigen();
        eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum()
    }
}

impl Serialize for SpdMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // Row-major flat array; dim is carried by the enclosing object.
        self.to_rows().serialize(s)
    }
}

/// Deserializer helper: a flat row-major array plus the expected dimension.
pub fn spd_from_flat(dim: usize, rows: Vec<f64>) -> Result<SpdMatrix> {
    SpdMatrix::from_rows(dim, &rows)
}

impl<'de> Deserialize<'de> for SpdMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows: Vec<f64> = Vec::deserialize(d)?;
        let dim = (rows.len() as f64).sqrt().round() as usize;
        SpdMatrix::from_rows(dim, &rows).map_err(D::Error::custom)
    }
}

/// Frobenius norm of a general matrix.
pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}
