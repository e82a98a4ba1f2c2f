use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, spd_factorize, vectorize, Matrix, SpdFactor};
use crate::scalar::Scalar;

/// Matrix-variate normal parameters `(M, Σ_c, Σ_r)`:
/// `vec(X) ~ N(vec(M), Σ_r ⊗ Σ_c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize + Clone", deserialize = "T: Deserialize<'de>"))]
pub struct MatNormalParams<T> {
    /// `c x r` mean.
    pub mean: Matrix<T>,
    /// `c x c` column covariance.
    pub col_cov: Matrix<T>,
    /// `r x r` row covariance.
    pub row_cov: Matrix<T>,
}

/// Factorized form of [`MatNormalParams`], ready for repeated solves.
#[derive(Clone, Debug)]
pub struct MatNormalFactors<T> {
    pub col: SpdFactor<T>,
    pub row: SpdFactor<T>,
}

impl<T: Scalar> MatNormalParams<T> {
    /// Builds and validates parameters.
    pub fn new(mean: Matrix<T>, col_cov: Matrix<T>, row_cov: Matrix<T>) -> Result<Self> {
        let p = Self {
            mean,
            col_cov,
            row_cov,
        };
        p.factors()?;
        Ok(p)
    }

    pub fn n_rows(&self) -> usize {
        self.mean.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.mean.cols()
    }

    /// Checks shapes and positive definiteness, returning both factors.
    pub fn factors(&self) -> Result<MatNormalFactors<T>> {
        let (c, r) = self.mean.shape();
        if self.col_cov.shape() != (c, c) {
            return Err(Error::DimensionMismatch {
                context: "column covariance vs mean rows",
                expected: c,
                found: self.col_cov.rows(),
            });
        }
        if self.row_cov.shape() != (r, r) {
            return Err(Error::DimensionMismatch {
                context: "row covariance vs mean columns",
                expected: r,
                found: self.row_cov.rows(),
            });
        }
        if !self.mean.is_finite() {
            return Err(Error::NonFinite { context: "mean matrix" });
        }
        Ok(MatNormalFactors {
            col: spd_factorize(&self.col_cov)?,
            row: spd_factorize(&self.row_cov)?,
        })
    }

    /// `(a Σ_c, Σ_r / a)`: same distribution, different scale split.
    pub fn rescaled(&self, a: T) -> Self {
        Self {
            mean: self.mean.clone(),
            col_cov: self.col_cov.scale(a),
            row_cov: self.row_cov.scale(T::one() / a),
        }
    }

    /// Rescales so that `trace(Σ_c) = c`.
    pub fn normalized(&self) -> Self {
        let c = T::from_usize_lossy(self.n_rows());
        self.rescaled(c / self.col_cov.trace())
    }

    /// `Σ_r ⊗ Σ_c`, the covariance of `vec(X)`.
    pub fn kron_cov(&self) -> Matrix<T> {
        kron(&self.row_cov, &self.col_cov)
    }

    /// Equivalent parameters of the vectorized model.
    pub fn to_mvn(&self) -> MvnParams<T> {
        MvnParams {
            mean: vectorize(&self.mean),
            cov: self.kron_cov(),
        }
    }
}

/// Multivariate normal parameters `(μ, Σ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize + Clone", deserialize = "T: Deserialize<'de>"))]
pub struct MvnParams<T> {
    pub mean: Vec<T>,
    pub cov: Matrix<T>,
}

impl<T: Scalar> MvnParams<T> {
    pub fn new(mean: Vec<T>, cov: Matrix<T>) -> Result<Self> {
        let p = Self { mean, cov };
        p.factor()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Checks the shape and returns the Cholesky factor of `Σ`.
    pub fn factor(&self) -> Result<SpdFactor<T>> {
        if self.cov.shape() != (self.mean.len(), self.mean.len()) {
            return Err(Error::DimensionMismatch {
                context: "covariance vs mean length",
                expected: self.mean.len(),
                found: self.cov.rows(),
            });
        }
        if !self.mean.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { context: "mean vector" });
        }
        spd_factorize(&self.cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_fixes_trace_and_keeps_kron() {
        let p = MatNormalParams::new(
            Matrix::zeros(2, 3),
            Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            Matrix::from_diagonal(&[1.0, 2.0, 3.0]),
        )
        .unwrap();
        let n = p.normalized();
        assert!((n.col_cov.trace() - 2.0f64).abs() < 1e-14);
        assert!(n.kron_cov().relative_distance(&p.kron_cov()) < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(MatNormalParams::new(Matrix::<f64>::zeros(2, 3), Matrix::identity(3), Matrix::identity(3)).is_err());
        assert!(MvnParams::new(vec![0.0; 2], Matrix::<f64>::identity(3)).is_err());
    }
}
