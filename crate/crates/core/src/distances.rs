//! Matrix-based and vector-based Mahalanobis squared distances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::MatrixDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::params::{MatNormalFactors, MatNormalParams, MvnParams};
use crate::scalar::Scalar;

/// Working-set budget (in scalars) for one batch of whitened samples.
const CHUNK_ELEMENTS: usize = 1 << 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsdKind {
    MatrixBased,
    VectorBased,
}

/// One distance per sample, in sample order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsdVector<T> {
    pub values: Vec<T>,
    pub kind: MsdKind,
    /// Degrees of freedom of the reference chi-square law (`c r` or `d`).
    pub dof: usize,
}

impl<T> MsdVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn chunk_samples(dim: usize) -> usize {
    (CHUNK_ELEMENTS / dim.max(1)).max(1)
}

/// `tr{Σ_c^{-1} (X_n - M) Σ_r^{-1} (X_n - M)^T}` for every sample.
///
/// Evaluated as `||L_c^{-1} (X_n - M) L_r^{-T}||_F^2`; both factors are
/// computed once per call.
pub fn msd_matrix<T: Scalar>(data: &MatrixDataset<T>, params: &MatNormalParams<T>) -> Result<MsdVector<T>> {
    let f = params.factors()?;
    msd_matrix_with(data, &params.mean, &f)
}

pub(crate) fn msd_matrix_with<T: Scalar>(
    data: &MatrixDataset<T>,
    mean: &Matrix<T>,
    f: &MatNormalFactors<T>,
) -> Result<MsdVector<T>> {
    let (c, r) = (data.n_rows(), data.n_cols());
    if mean.shape() != (c, r) {
        return Err(Error::DimensionMismatch {
            context: "dataset sample shape vs mean",
            expected: c * r,
            found: mean.rows() * mean.cols(),
        });
    }
    let d = c * r;
    let per_chunk = chunk_samples(d);
    let values: Vec<T> = data
        .as_slice()
        .par_chunks(per_chunk * d)
        .flat_map_iter(|chunk| {
            let k = chunk.len() / d;
            let mut w = chunk.to_vec();
            for s in w.chunks_mut(d) {
                for (x, &m) in s.iter_mut().zip(mean.as_slice()) {
                    *x -= m;
                }
            }
            f.row.whiten_rows_in_place(&mut w, k * c);
            for s in w.chunks_mut(d) {
                f.col.whiten_block_in_place(s, r);
            }
            w.chunks(d)
                .map(|s| s.iter().map(|&x| x * x).sum::<T>())
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(MsdVector {
        values,
        kind: MsdKind::MatrixBased,
        dof: d,
    })
}

/// `(x_n - μ)^T Σ^{-1} (x_n - μ)` for every row `x_n` of `vectors`.
pub fn msd_vector<T: Scalar>(vectors: &Matrix<T>, params: &MvnParams<T>) -> Result<MsdVector<T>> {
    let d = params.dim();
    if vectors.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "vector dimension vs parameters",
            expected: d,
            found: vectors.cols(),
        });
    }
    let f = params.factor()?;
    let per_chunk = chunk_samples(d);
    let values: Vec<T> = vectors
        .as_slice()
        .par_chunks(per_chunk * d.max(1))
        .flat_map_iter(|chunk| {
            let k = chunk.len() / d.max(1);
            let mut w = chunk.to_vec();
            for s in w.chunks_mut(d.max(1)) {
                for (x, &m) in s.iter_mut().zip(&params.mean) {
                    *x -= m;
                }
            }
            f.whiten_rows_in_place(&mut w, k);
            w.chunks(d.max(1))
                .map(|s| s.iter().map(|&x| x * x).sum::<T>())
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(MsdVector {
        values,
        kind: MsdKind::VectorBased,
        dof: d,
    })
}

/// [`msd_vector`] on the vectorized samples of a matrix dataset.
pub fn msd_vector_of_dataset<T: Scalar>(data: &MatrixDataset<T>, params: &MvnParams<T>) -> Result<MsdVector<T>> {
    msd_vector(&data.vectorized(), params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_mean_and_scalar_case() {
        let p = MatNormalParams::new(
            Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap(),
            Matrix::identity(1),
            Matrix::from_diagonal(&[2.0, 3.0]),
        )
        .unwrap();
        let ds = MatrixDataset::from_buffer(1, 2, vec![1.0f64, 2.0, 3.0, 5.0]).unwrap();
        let m = msd_matrix(&ds, &p).unwrap();
        assert_eq!(m.values[0], 0.0);
        assert!((m.values[1] - (4.0 / 2.0 + 9.0 / 3.0)).abs() < 1e-14);
        assert_eq!((m.kind, m.dof), (MsdKind::MatrixBased, 2));
    }

    #[test]
    fn vector_diagonal_case() {
        let p = MvnParams::new(vec![0.0f64, 0.0], Matrix::from_diagonal(&[2.0, 1.0])).unwrap();
        let x = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = msd_vector(&x, &p).unwrap();
        assert!((m.values[0] - 3.0).abs() < 1e-14);
        assert_eq!(m.values[1], 0.0);
        assert!((m.values[2] - 1.0).abs() < 1e-14);
    }
}
