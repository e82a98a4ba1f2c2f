//! Maximum-likelihood fits of the unstructured and Kronecker-structured
//! normal models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::MatrixDataset;
use crate::distances::msd_matrix_with;
use crate::error::{Error, Result, SingularReason};
use crate::linalg::kernels::{gram, Strided};
use crate::linalg::{spd_factorize, Matrix, SpdFactor};
use crate::params::{MatNormalParams, MvnParams};
use crate::scalar::Scalar;

/// Divisor used for a sample covariance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `N - 1`.
    Unbiased,
    /// `N`, the strict maximum-likelihood scaling.
    MaximumLikelihood,
}

/// Column means of an `N x d` matrix.
pub fn sample_mean<T: Scalar>(vectors: &Matrix<T>) -> Vec<T> {
    let n = vectors.rows();
    let mut mean = vec![T::zero(); vectors.cols()];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(vectors.row(i)) {
            *m += x;
        }
    }
    let inv = T::one() / T::from_usize_lossy(n.max(1));
    mean.iter_mut().for_each(|m| *m *= inv);
    mean
}

/// `Σ (x_n - m)(x_n - m)^T / divisor`.
pub fn sample_covariance<T: Scalar>(vectors: &Matrix<T>, mean: &[T], denominator: Denominator) -> Result<Matrix<T>> {
    let (n, d) = vectors.shape();
    if mean.len() != d {
        return Err(Error::DimensionMismatch {
            context: "covariance mean length",
            expected: d,
            found: mean.len(),
        });
    }
    let divisor = match denominator {
        Denominator::Unbiased => n.saturating_sub(1),
        Denominator::MaximumLikelihood => n,
    };
    if divisor == 0 {
        return Err(Error::InvalidInput(format!(
            "covariance needs more samples (N = {n})"
        )));
    }
    let mut centered = vectors.clone();
    for i in 0..n {
        for (x, &m) in centered.row_mut(i).iter_mut().zip(mean) {
            *x -= m;
        }
    }
    let mut s = centered.transpose_matmul(&centered)?;
    s.scale_in_place(T::one() / T::from_usize_lossy(divisor));
    s.symmetrize();
    Ok(s)
}

/// Unstructured fit `(μ̂, Σ̂)` with the `N - 1` covariance divisor.
///
/// Fails with [`Error::CovarianceSingular`] when `d >= N` or when `Σ̂`
/// does not factor.
pub fn mvn_mle<T: Scalar>(vectors: &Matrix<T>) -> Result<MvnParams<T>> {
    mvn_fit(vectors, Denominator::Unbiased)
}

/// [`mvn_mle`] with a chosen covariance divisor.
pub fn mvn_fit<T: Scalar>(vectors: &Matrix<T>, denominator: Denominator) -> Result<MvnParams<T>> {
    let (n, d) = vectors.shape();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "unstructured fit needs N >= 2, got {n}"
        )));
    }
    if d >= n {
        return Err(Error::CovarianceSingular(SingularReason::DimensionNotBelowSamples {
            dim: d,
            samples: n,
        }));
    }
    let mean = sample_mean(vectors);
    let cov = sample_covariance(vectors, &mean, denominator)?;
    match spd_factorize(&cov) {
        Ok(_) => Ok(MvnParams { mean, cov }),
        Err(Error::NotPositiveDefinite { pivot_index, .. }) => {
            Err(Error::CovarianceSingular(SingularReason::RankDeficient { pivot_index }))
        }
        Err(e) => Err(e),
    }
}

/// Entrywise mean of the samples.
pub fn matnormal_mean<T: Scalar>(data: &MatrixDataset<T>) -> Matrix<T> {
    let d = data.dim();
    let mut acc = vec![T::zero(); d];
    for s in data.samples() {
        for (a, &x) in acc.iter_mut().zip(s) {
            *a += x;
        }
    }
    let inv = T::one() / T::from_usize_lossy(data.n_samples());
    acc.iter_mut().for_each(|a| *a *= inv);
    Matrix::from_vec(data.n_rows(), data.n_cols(), acc).expect("sample shape")
}

/// Starting value of `Σ_r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRowCov {
    #[default]
    Identity,
    /// `diag(Σ_n R_n^T R_n) / (N c)` of the centered samples `R_n`.
    DiagonalOfMoment,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipFlopConfig {
    /// Stop when both relative Frobenius changes fall below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init_row_cov: InitRowCov,
}

impl Default for FlipFlopConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            init_row_cov: InitRowCov::Identity,
        }
    }
}

impl FlipFlopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidInput(format!(
                "flip-flop tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("flip-flop needs max_iterations >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize + Clone", deserialize = "T: Deserialize<'de>"))]
pub struct FlipFlopReport<T> {
    /// Fitted parameters, normalized to `trace(Σ_c) = c`.
    pub params: MatNormalParams<T>,
    pub iterations_used: usize,
    /// Log-likelihood after each full iteration.
    pub log_likelihood_trace: Vec<T>,
    /// `false` when `max_iterations` ran out first.
    pub converged: bool,
}

/// Smallest accepted `min pivot / max pivot` of an updated factor.
const FLIPFLOP_PIVOT_RATIO: f64 = 1e-10;

/// Flip-flop maximum likelihood for `(M, Σ_c, Σ_r)`.
///
/// Alternates
/// `Σ_c = Σ_n R_n Σ_r^{-1} R_n^T / (N r)` and
/// `Σ_r = Σ_n R_n^T Σ_c^{-1} R_n / (N c)` on the centered samples
/// `R_n = X_n - M̂`, rescaling each iterate to `trace(Σ_c) = c` (which
/// leaves `Σ_r ⊗ Σ_c` unchanged).
///
/// After each conditional update the trace term of the log-likelihood equals
/// `N c r`, so the recorded value is
/// `-N c r (ln 2π + 1) / 2 - (N c / 2) ln|Σ_r| - (N r / 2) ln|Σ_c|`.
pub fn flipflop_mle<T: Scalar>(data: &MatrixDataset<T>, config: &FlipFlopConfig) -> Result<FlipFlopReport<T>> {
    config.validate()?;
    let (n, c, r) = (data.n_samples(), data.n_rows(), data.n_cols());
    if n < 2 || n * r <= c || n * c <= r {
        return Err(Error::InvalidInput(format!(
            "flip-flop needs N >= 2, N r > c and N c > r (N = {n}, c = {c}, r = {r})"
        )));
    }
    let mean = matnormal_mean(data);
    let d = c * r;
    // Residuals laid out as one c x (N r) matrix: row i holds row i of every
    // centered sample, so each half-step is a single solve and product.
    let nr = n * r;
    let mut resid = vec![T::zero(); n * d];
    for (s, x) in data.as_slice().chunks(d).enumerate() {
        for i in 0..c {
            let dst = &mut resid[i * nr + s * r..i * nr + (s + 1) * r];
            for ((o, &v), &m) in dst.iter_mut().zip(&x[i * r..(i + 1) * r]).zip(&mean.as_slice()[i * r..(i + 1) * r]) {
                *o = v - m;
            }
        }
    }
    let mut work = vec![T::zero(); resid.len()];
    let nf = T::from_usize_lossy(n);
    let (cf, rf) = (T::from_usize_lossy(c), T::from_usize_lossy(r));

    let mut row_cov = match config.init_row_cov {
        InitRowCov::Identity => Matrix::identity(r),
        InitRowCov::DiagonalOfMoment => {
            let mut diag = vec![T::zero(); r];
            for row in resid.chunks(r) {
                for (a, &x) in diag.iter_mut().zip(row) {
                    *a += x * x;
                }
            }
            let inv = T::one() / (nf * cf);
            Matrix::from_diagonal(&diag.iter().map(|&x| x * inv).collect::<Vec<_>>())
        }
    };
    let mut row_f = guarded_factor(&row_cov, 0)?;
    let mut col_cov = Matrix::<T>::zeros(c, c);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let const_term = -T::lit(0.5) * nf * cf * rf * T::lit((2.0 * PI).ln() + 1.0);

    for it in 1..=config.max_iterations {
        iterations = it;
        // Σ_c update: W_n = R_n L_r^{-T}, Σ_c = Σ_n W_n W_n^T / (N r).
        work.copy_from_slice(&resid);
        row_f.whiten_rows_in_place(&mut work, n * c);
        let mut new_col = Matrix::zeros(c, c);
        let w = Strided::new(&work, c, nr, nr, 1);
        gram(T::one() / (nf * rf), w, &mut new_col.view_mut());
        let col_f = guarded_factor(&new_col, it)?;

        // Σ_r update: V_n = L_c^{-1} R_n, Σ_r = Σ_n V_n^T V_n / (N c).
        work.copy_from_slice(&resid);
        col_f.whiten_block_in_place(&mut work, nr);
        let stacked = Strided::new(&work, n * c, r, r, 1);
        let mut new_row = Matrix::zeros(r, r);
        gram(T::one() / (nf * cf), stacked.t(), &mut new_row.view_mut());
        let new_row_f = guarded_factor(&new_row, it)?;

        let ll = const_term
            - T::lit(0.5) * nf * cf * new_row_f.log_determinant()
            - T::lit(0.5) * nf * rf * col_f.log_determinant();
        trace.push(ll);

        // Rescale to trace(Σ_c) = c before measuring the change.
        let a = cf / new_col.trace();
        new_col.scale_in_place(a);
        new_row.scale_in_place(T::one() / a);
        let change_c = if it == 1 { T::infinity() } else { new_col.relative_distance(&col_cov) };
        let change_r = new_row.relative_distance(&row_cov);
        col_cov = new_col;
        row_cov = new_row;
        row_f = guarded_factor(&row_cov, it)?;
        if change_c.max(change_r) < T::lit(config.tolerance) {
            converged = true;
            break;
        }
    }
    Ok(FlipFlopReport {
        params: MatNormalParams {
            mean,
            col_cov,
            row_cov,
        },
        iterations_used: iterations,
        log_likelihood_trace: trace,
        converged,
    })
}

fn guarded_factor<T: Scalar>(s: &Matrix<T>, iteration: usize) -> Result<SpdFactor<T>> {
    let f = spd_factorize(s).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot_index, pivot, .. } => Error::NotPositiveDefinite {
            pivot_index,
            pivot,
            iteration: Some(iteration),
        },
        other => other,
    })?;
    if f.pivot_ratio() < T::lit(FLIPFLOP_PIVOT_RATIO) {
        let lower = f.lower();
        let (idx, pivot) = (0..f.dim())
            .map(|i| (i, lower[(i, i)] * lower[(i, i)]))
            .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
        return Err(Error::NotPositiveDefinite {
            pivot_index: idx,
            pivot: pivot.as_f64(),
            iteration: Some(iteration),
        });
    }
    Ok(f)
}

/// `Σ_n ln p(X_n)` under the matrix normal density.
pub fn matnormal_loglik<T: Scalar>(data: &MatrixDataset<T>, params: &MatNormalParams<T>) -> Result<T> {
    let f = params.factors()?;
    let msd = msd_matrix_with(data, &params.mean, &f)?;
    let (c, r) = (T::from_usize_lossy(data.n_rows()), T::from_usize_lossy(data.n_cols()));
    let half = T::lit(0.5);
    let per_sample = -half * c * r * T::lit((2.0 * PI).ln())
        - half * c * f.row.log_determinant()
        - half * r * f.col.log_determinant();
    Ok(msd
        .values
        .iter()
        .map(|&q| per_sample - half * q)
        .sum())
}
