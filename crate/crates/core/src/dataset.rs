use crate::error::{Error, Result};
use crate::linalg::{unvectorize_into, vectorize_into, Matrix};
use crate::scalar::Scalar;

/// `N` real `c x r` matrices stored contiguously, each sample row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixDataset<T> {
    n_samples: usize,
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> MatrixDataset<T> {
    /// Wraps a buffer of `N * c * r` values (sample-major, row-major within a sample).
    pub fn from_buffer(n_rows: usize, n_cols: usize, data: Vec<T>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidInput(format!(
                "sample shape must be positive, got {n_rows}x{n_cols}"
            )));
        }
        let per = n_rows * n_cols;
        if data.is_empty() || data.len() % per != 0 {
            return Err(Error::DimensionMismatch {
                context: "dataset buffer (multiple of c*r, at least one sample)",
                expected: per,
                found: data.len(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { context: "dataset" });
        }
        Ok(Self {
            n_samples: data.len() / per,
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_samples(samples: &[Matrix<T>]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidInput("dataset needs at least one sample".into()))?;
        let (c, r) = first.shape();
        let mut data = Vec::with_capacity(samples.len() * c * r);
        for s in samples {
            if s.shape() != (c, r) {
                return Err(Error::DimensionMismatch {
                    context: "sample shape",
                    expected: c * r,
                    found: s.rows() * s.cols(),
                });
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::from_buffer(c, r, data)
    }

    /// Rebuilds matrices from an `N x (c r)` matrix of vectorized samples.
    pub fn from_vectorized(vectors: &Matrix<T>, n_rows: usize, n_cols: usize) -> Result<Self> {
        let d = n_rows * n_cols;
        if vectors.cols() != d {
            return Err(Error::DimensionMismatch {
                context: "vectorized dimension vs c*r",
                expected: d,
                found: vectors.cols(),
            });
        }
        let mut data = vec![T::zero(); vectors.rows() * d];
        for (n, out) in data.chunks_mut(d.max(1)).enumerate() {
            unvectorize_into(vectors.row(n), n_rows, n_cols, out);
        }
        Self::from_buffer(n_rows, n_cols, data)
    }

    /// `N`.
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// `c`.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// `r`.
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// `d = c r`, the dimension of a vectorized sample.
    pub fn dim(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// Row-major slice of sample `n` (0-based).
    pub fn sample(&self, n: usize) -> &[T] {
        let d = self.dim();
        &self.data[n * d..(n + 1) * d]
    }

    pub fn sample_matrix(&self, n: usize) -> Matrix<T> {
        Matrix::from_vec(self.n_rows, self.n_cols, self.sample(n).to_vec()).expect("sample shape")
    }

    pub fn samples(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.dim())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `N x (c r)` matrix whose rows are `vec(X_n)`.
    pub fn vectorized(&self) -> Matrix<T> {
        let d = self.dim();
        let mut out = Matrix::zeros(self.n_samples, d);
        for (n, dst) in out.as_mut_slice().chunks_mut(d).enumerate() {
            vectorize_into(self.sample(n), self.n_rows, self.n_cols, dst);
        }
        out
    }

    /// Applies `f` to every sample, producing a dataset of the same count.
    pub fn map_samples(&self, mut f: impl FnMut(Matrix<T>) -> Matrix<T>) -> Result<Self> {
        let mapped: Vec<Matrix<T>> = (0..self.n_samples).map(|n| f(self.sample_matrix(n))).collect();
        Self::from_samples(&mapped)
    }
}
