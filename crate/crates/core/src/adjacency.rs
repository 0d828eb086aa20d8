use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric nonnegative weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    weights: DMatrix<f64>,
}

impl Adjacency {
    /// `A = |Z| + |Z|ᵀ` with the diagonal forced to zero.
    pub fn from_coefficients(z: &DMatrix<f64>) -> Result<Self> {
        if !z.is_square() {
            return Err(Error::Dimension(format!("coefficient matrix is {}x{}", z.nrows(), z.ncols())));
        }
        let n = z.nrows();
        let abs = z.abs();
        let mut w = &abs + abs.transpose();
        for i in 0..n {
            w[(i, i)] = 0.0;
        }
        Ok(Self { weights: w })
    }

    /// Validate an explicit weight matrix: square, symmetric, nonnegative, zero diagonal.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Dimension(format!("adjacency is {}x{}", weights.nrows(), weights.ncols())));
        }
        let n = weights.nrows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) = {w} is not a finite nonnegative weight")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidInput(format!("asymmetric entries at ({i},{j})")));
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.weights.row_iter().map(|r| r.sum()).collect()
    }

    /// Number of unordered pairs `i < j` with a positive weight.
    pub fn edge_count(&self) -> usize {
        let n = self.len();
        (0..n).map(|i| (i + 1..n).filter(|&j| self.weights[(i, j)] > 0.0).count()).sum()
    }
}
