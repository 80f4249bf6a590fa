//! Feature matrices: the T×D arrays every other module operates on.
//!
//! Rows are timesteps (or flattened batch·time samples), columns are
//! channels. Values must be finite; construction checks this once so the
//! numeric code never has to.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A real T×D feature matrix with at least one row and one column and no
/// NaN/Inf entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    inner: DMatrix<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major values.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        let inner = DMatrix::from_row_slice(rows, cols, values);
        Self::from_dmatrix(inner)
    }

    /// Wraps an existing nalgebra matrix, validating the invariants.
    pub fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        for col in 0..inner.ncols() {
            for row in 0..inner.nrows() {
                if !inner[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Number of rows (timesteps / samples).
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    /// Number of columns (channels).
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// The underlying column-major nalgebra matrix.
    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// Copies channel `c` out as a vector.
    pub fn column(&self, c: usize) -> DVector<f64> {
        DVector::from(self.inner.column(c))
    }

    pub fn column_norm(&self, c: usize) -> f64 {
        self.inner.column(c).norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    /// Row-major copy of the values, for serialization.
    pub fn to_row_major(&self) -> Vec<f64> {
        let (t, d) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(t * d);
        for row in 0..t {
            for col in 0..d {
                out.push(self.inner[(row, col)]);
            }
        }
        out
    }

    /// Entrywise negation. Flips the geometry of every channel while leaving
    /// the singular values untouched.
    pub fn negated(&self) -> Self {
        Self {
            inner: -self.inner.clone(),
        }
    }

    /// Returns a copy with every column shifted to zero mean.
    pub fn centered_columns(&self) -> Self {
        let mut inner = self.inner.clone();
        let t = inner.nrows() as f64;
        for mut col in inner.column_iter_mut() {
            let mean = col.sum() / t;
            col.add_scalar_mut(-mean);
        }
        Self { inner }
    }

    /// Checks that `other` has the same shape.
    pub fn same_dims(&self, other: &Self) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::dims(
                (self.rows(), self.cols()),
                (other.rows(), other.cols()),
            ));
        }
        Ok(())
    }
}

impl TryFrom<DMatrix<f64>> for FeatureMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        Self::from_dmatrix(m)
    }
}
