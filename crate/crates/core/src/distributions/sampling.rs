use rand::Rng;
use rand_distr::StandardNormal;

use super::RngStream;
use crate::dataset::MatrixDataset;
use crate::error::{Error, Result};
use crate::linalg::{nearest_kronecker_residual, orthonormalize, unvectorize_into, Matrix};
use crate::params::{MatNormalParams, MvnParams};
use crate::scalar::Scalar;

/// Condition cap used when callers do not choose one.
pub const DEFAULT_CONDITION_CAP: f64 = 100.0;

/// Minimum relative nearest-Kronecker residual accepted by [`random_nonkron_spd`].
pub const NONKRON_MIN_RESIDUAL: f64 = 0.05;

/// Redraw budget of [`random_nonkron_spd`].
pub const NONKRON_MAX_DRAWS: usize = 100;

fn fill_normal<T: Scalar, R: Rng>(rng: &mut R, out: &mut [T]) {
    for x in out {
        let z: f64 = rng.sample(StandardNormal);
        *x = T::lit(z);
    }
}

/// `count` i.i.d. standard normal deviates.
pub fn sample_standard_normal<T: Scalar>(stream: RngStream, count: usize) -> Vec<T> {
    let mut out = vec![T::zero(); count];
    fill_normal(&mut stream.rng(), &mut out);
    out
}

/// Random SPD matrix `Q D Q^T`: `Q` Haar-orthogonal (QR of a Gaussian
/// matrix), `D` log-uniform on `[1, condition_cap]`.
pub fn random_spd<T: Scalar>(stream: RngStream, dim: usize, condition_cap: T) -> Result<Matrix<T>> {
    if dim == 0 {
        return Err(Error::InvalidInput("random_spd needs dim >= 1".into()));
    }
    if !(condition_cap >= T::one()) || !condition_cap.is_finite() {
        return Err(Error::InvalidInput(format!(
            "condition cap must be a finite value >= 1, got {condition_cap}"
        )));
    }
    let mut rng = stream.rng();
    let log_cap = condition_cap.as_f64().ln();
    let eig: Vec<T> = (0..dim)
        .map(|_| T::lit((rng.random::<f64>() * log_cap).exp()))
        .collect();
    if dim == 1 {
        return Ok(Matrix::from_diagonal(&eig));
    }
    let mut g = Matrix::zeros(dim, dim);
    fill_normal(&mut rng, g.as_mut_slice());
    let q = orthonormalize(&g);
    let mut qd = q.clone();
    for i in 0..dim {
        for (x, &e) in qd.row_mut(i).iter_mut().zip(&eig) {
            *x *= e;
        }
    }
    let mut s = qd.matmul_transpose(&q)?;
    s.symmetrize();
    Ok(s)
}

/// `count` draws `M + L_c Z L_r^T` with `Z` i.i.d. standard normal.
pub fn sample_matnormal<T: Scalar>(
    stream: RngStream,
    params: &MatNormalParams<T>,
    count: usize,
) -> Result<MatrixDataset<T>> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be >= 1".into()));
    }
    let f = params.factors()?;
    let (c, r) = params.mean.shape();
    let lc = f.col.lower();
    let lr = f.row.lower();
    let mut rng = stream.rng();
    let mut data = Vec::with_capacity(count * c * r);
    let mut z = Matrix::zeros(c, r);
    for _ in 0..count {
        fill_normal(&mut rng, z.as_mut_slice());
        let x = lc.matmul(&z)?.matmul_transpose(lr)?.add(&params.mean)?;
        data.extend_from_slice(x.as_slice());
    }
    MatrixDataset::from_buffer(c, r, data)
}

/// `count` draws `μ + L z`, one per row of the returned `count x d` matrix.
pub fn sample_mvn<T: Scalar>(stream: RngStream, params: &MvnParams<T>, count: usize) -> Result<Matrix<T>> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be >= 1".into()));
    }
    let f = params.factor()?;
    let d = params.dim();
    let mut z = Matrix::zeros(count, d);
    fill_normal(&mut stream.rng(), z.as_mut_slice());
    let mut x = z.matmul_transpose(f.lower())?;
    for n in 0..count {
        for (v, &m) in x.row_mut(n).iter_mut().zip(&params.mean) {
            *v += m;
        }
    }
    Ok(x)
}

/// [`sample_mvn`] with every vector reshaped into a `c x r` matrix through
/// the inverse of the column-major `vec`.
pub fn sample_mvn_matrices<T: Scalar>(
    stream: RngStream,
    params: &MvnParams<T>,
    count: usize,
    n_rows: usize,
    n_cols: usize,
) -> Result<MatrixDataset<T>> {
    if n_rows * n_cols != params.dim() {
        return Err(Error::DimensionMismatch {
            context: "reshape of MVN draws to c x r",
            expected: params.dim(),
            found: n_rows * n_cols,
        });
    }
    let x = sample_mvn(stream, params, count)?;
    MatrixDataset::from_vectorized(&x, n_rows, n_cols)
}

/// Random SPD `cr x cr` matrix whose relative distance from the nearest
/// Kronecker product is at least [`NONKRON_MIN_RESIDUAL`].
///
/// Draws [`random_spd`] with the default condition cap and redraws on
/// rejection. When `c = 1` or `r = 1` every covariance is exactly Kronecker,
/// so the budget runs out.
pub fn random_nonkron_spd<T: Scalar>(stream: RngStream, n_rows: usize, n_cols: usize) -> Result<Matrix<T>> {
    let d = n_rows * n_cols;
    if n_rows == 0 || n_cols == 0 || d < 2 {
        return Err(Error::InvalidInput(format!(
            "non-Kronecker covariance needs c, r >= 1 and c r >= 2, got {n_rows}x{n_cols}"
        )));
    }
    for attempt in 0..NONKRON_MAX_DRAWS {
        let s = random_spd(stream.split(attempt as u64), d, T::lit(DEFAULT_CONDITION_CAP))?;
        if nearest_kronecker_residual(&s, n_rows, n_cols) >= T::lit(NONKRON_MIN_RESIDUAL) {
            return Ok(s);
        }
    }
    Err(Error::RejectionExhausted {
        attempts: NONKRON_MAX_DRAWS,
    })
}

/// Covariance `P (A ⊗ B) P^T` of a randomly permuted matrix-normal vector.
///
/// Used as the non-Kronecker control when `c r` is too large for a dense
/// random covariance: vec entries are shuffled by a fixed permutation, which
/// breaks the Kronecker pattern while keeping sampling at matrix-normal cost.
#[derive(Clone, Debug)]
pub struct PermutedKronecker<T> {
    pub base: MatNormalParams<T>,
    /// `permutation[k]` is the source position of output position `k` in `vec` order.
    pub permutation: Vec<usize>,
}

impl<T: Scalar> PermutedKronecker<T> {
    pub fn random(stream: RngStream, n_rows: usize, n_cols: usize) -> Result<Self> {
        let cap = T::lit(DEFAULT_CONDITION_CAP);
        let col_cov = random_spd(stream.split(0), n_rows, cap)?;
        let row_cov = random_spd(stream.split(1), n_cols, cap)?;
        let base = MatNormalParams::new(Matrix::zeros(n_rows, n_cols), col_cov, row_cov)?;
        let mut permutation: Vec<usize> = (0..n_rows * n_cols).collect();
        let mut rng = stream.split(2).rng();
        for i in (1..permutation.len()).rev() {
            let j = rng.random_range(0..=i);
            permutation.swap(i, j);
        }
        Ok(Self { base, permutation })
    }

    pub fn sample(&self, stream: RngStream, count: usize) -> Result<MatrixDataset<T>> {
        let raw = sample_matnormal(stream, &self.base, count)?;
        let (c, r) = (raw.n_rows(), raw.n_cols());
        let d = c * r;
        let v = raw.vectorized();
        let mut data = vec![T::zero(); count * d];
        let mut permuted = vec![T::zero(); d];
        for (n, out) in data.chunks_mut(d).enumerate() {
            let src = v.row(n);
            for (p, &k) in permuted.iter_mut().zip(&self.permutation) {
                *p = src[k];
            }
            unvectorize_into(&permuted, c, r, out);
        }
        MatrixDataset::from_buffer(c, r, data)
    }
}
