//! Dense linear algebra: the matrix type, Kronecker products, the
//! column-major `vec` convention and symmetric positive-definite factors.
//!
//! Every `Σ^{-1}` application in the crate goes through [`SpdFactor`]; no
//! covariance inverse is ever formed.

pub(crate) mod kernels;
mod matrix;
mod qr;
mod spd;

pub use matrix::Matrix;
pub use qr::{orthonormalize, nearest_kronecker_residual};
pub use spd::{spd_factorize, spd_factorize_with, SpdFactor, PIVOT_TOLERANCE, SYMMETRY_TOLERANCE};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (p, q) = a.shape();
    let (s, t) = b.shape();
    let mut out = Matrix::zeros(p * s, q * t);
    for i in 0..p {
        for j in 0..q {
            let aij = a[(i, j)];
            for k in 0..s {
                let dst = &mut out.row_mut(i * s + k)[j * t..(j + 1) * t];
                for (d, &bv) in dst.iter_mut().zip(b.row(k)) {
                    *d = aij * bv;
                }
            }
        }
    }
    out
}

/// Column-major stacking: entry `(i, j)` of a `c x r` matrix lands at
/// position `j * c + i`, so that `vec(A X B) = (B^T ⊗ A) vec(X)`.
pub fn vectorize<T: Scalar>(x: &Matrix<T>) -> Vec<T> {
    let (c, r) = x.shape();
    let mut v = vec![T::zero(); c * r];
    vectorize_into(x.as_slice(), c, r, &mut v);
    v
}

/// [`vectorize`] on a raw row-major `c x r` slice.
pub(crate) fn vectorize_into<T: Scalar>(x: &[T], c: usize, r: usize, out: &mut [T]) {
    debug_assert_eq!(x.len(), c * r);
    debug_assert_eq!(out.len(), c * r);
    for i in 0..c {
        for j in 0..r {
            out[j * c + i] = x[i * r + j];
        }
    }
}

/// Inverse of [`vectorize`].
pub fn unvectorize<T: Scalar>(v: &[T], c: usize, r: usize) -> Result<Matrix<T>> {
    if v.len() != c * r {
        return Err(Error::DimensionMismatch {
            context: "reshape of vectorized sample",
            expected: c * r,
            found: v.len(),
        });
    }
    let mut out = Matrix::zeros(c, r);
    unvectorize_into(v, c, r, out.as_mut_slice());
    Ok(out)
}

pub(crate) fn unvectorize_into<T: Scalar>(v: &[T], c: usize, r: usize, out: &mut [T]) {
    debug_assert_eq!(v.len(), c * r);
    for i in 0..c {
        for j in 0..r {
            out[i * r + j] = v[j * c + i];
        }
    }
}
