use super::kernels::{self, CholeskyOutcome, StridedMut};
use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative symmetry tolerance accepted by [`spd_factorize`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Pivots below this fraction of the largest diagonal entry are rejected.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

const WHITEN_PANEL_ELEMENTS: usize = 1 << 16;

/// Cholesky factor `L` of a symmetric positive-definite matrix, `S = L L^T`.
#[derive(Clone, Debug)]
pub struct SpdFactor<T> {
    lower: Matrix<T>,
    log_determinant: T,
    min_pivot: T,
    max_pivot: T,
}

/// Factorizes a symmetric positive-definite matrix.
///
/// The input is symmetrized before factoring. Fails with
/// [`Error::NotPositiveDefinite`] when a pivot is not above
/// `1e-12 * max_i s_ii`.
pub fn spd_factorize<T: Scalar>(s: &Matrix<T>) -> Result<SpdFactor<T>> {
    spd_factorize_with(s, T::lit(PIVOT_TOLERANCE))
}

/// [`spd_factorize`] with a caller-chosen relative pivot threshold.
pub fn spd_factorize_with<T: Scalar>(s: &Matrix<T>, relative_pivot: T) -> Result<SpdFactor<T>> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            context: "factorization of a non-square matrix",
            expected: s.rows(),
            found: s.cols(),
        });
    }
    if !s.is_finite() {
        return Err(Error::NonFinite {
            context: "matrix to factorize",
        });
    }
    let asym = s.asymmetry();
    if asym > T::lit(SYMMETRY_TOLERANCE) {
        return Err(Error::NotSymmetric {
            relative_asymmetry: asym.as_f64(),
        });
    }
    let n = s.rows();
    let mut lower = s.clone();
    lower.symmetrize();
    let max_diag = lower
        .diagonal()
        .into_iter()
        .fold(T::zero(), |acc, d| if d > acc { d } else { acc });
    let threshold = relative_pivot * max_diag;
    match kernels::cholesky_in_place(lower.as_mut_slice(), n, threshold) {
        CholeskyOutcome::Failed { index, pivot } => Err(Error::NotPositiveDefinite {
            pivot_index: index,
            pivot: pivot.as_f64(),
            iteration: None,
        }),
        CholeskyOutcome::Factored(pivots) => {
            let log_determinant = pivots.iter().map(|p| p.ln()).sum();
            let (min_pivot, max_pivot) = pivots.iter().fold(
                (T::infinity(), T::zero()),
                |(lo, hi), &p| (lo.min(p), hi.max(p)),
            );
            Ok(SpdFactor {
                lower,
                log_determinant,
                min_pivot,
                max_pivot,
            })
        }
    }
}

impl<T: Scalar> SpdFactor<T> {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    /// `ln |S|`, equal to `2 * sum(ln L_ii)`.
    pub fn log_determinant(&self) -> T {
        self.log_determinant
    }

    /// `min pivot / max pivot`; small values flag ill-conditioning.
    pub fn pivot_ratio(&self) -> T {
        if self.dim() == 0 {
            T::one()
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> Matrix<T> {
        self.lower
            .matmul_transpose(&self.lower)
            .expect("square factor")
    }

    /// `S^{-1} b` for a vector.
    pub fn solve_vec(&self, b: &[T]) -> Result<Vec<T>> {
        self.check_dim(b.len())?;
        let mut x = b.to_vec();
        let n = x.len();
        let mut view = StridedMut::new(&mut x, n, 1, 1, 1);
        self.solve_view(&mut view);
        Ok(x)
    }

    /// `S^{-1} B` for a matrix with `dim()` rows.
    pub fn solve_matrix(&self, b: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_dim(b.rows())?;
        let mut x = b.clone();
        self.solve_view(&mut x.view_mut());
        Ok(x)
    }

    /// `L^{-1} B` in place.
    pub fn whiten_in_place(&self, b: &mut Matrix<T>) -> Result<()> {
        self.check_dim(b.rows())?;
        kernels::trsm_lower(self.lower.as_slice(), self.dim(), &mut b.view_mut());
        Ok(())
    }

    /// `b <- L^{-1} b` for a vector.
    pub fn whiten_vec_in_place(&self, b: &mut [T]) -> Result<()> {
        self.check_dim(b.len())?;
        let n = b.len();
        kernels::trsm_lower(self.lower.as_slice(), n, &mut StridedMut::new(b, n, 1, 1, 1));
        Ok(())
    }

    /// Whitens every row of a row-major `rows x dim()` buffer:
    /// `Y <- Y L^{-T}`, so each row `y` becomes `L^{-1} y`.
    pub(crate) fn whiten_rows_in_place(&self, data: &mut [T], rows: usize) {
        let n = self.dim();
        assert_eq!(data.len(), rows * n);
        if n == 0 {
            return;
        }
        // Cache-sized row panels.
        let panel = (WHITEN_PANEL_ELEMENTS / n).max(1);
        for chunk in data.chunks_mut(panel * n) {
            let k = chunk.len() / n;
            let mut view = StridedMut::new(chunk, n, k, 1, n);
            kernels::trsm_lower(self.lower.as_slice(), n, &mut view);
        }
    }

    /// `B <- L^{-1} B` for a row-major `dim() x cols` buffer.
    pub(crate) fn whiten_block_in_place(&self, data: &mut [T], cols: usize) {
        let n = self.dim();
        assert_eq!(data.len(), n * cols);
        if n == 0 || cols == 0 {
            return;
        }
        let panel = (WHITEN_PANEL_ELEMENTS / n).max(1).min(cols);
        let mut start = 0;
        while start < cols {
            let width = panel.min(cols - start);
            let mut view = StridedMut::new(&mut data[start..], n, width, cols, 1);
            kernels::trsm_lower(self.lower.as_slice(), n, &mut view);
            start += width;
        }
    }

    /// `quad(b) = b^T S^{-1} b`.
    pub fn quadratic_form(&self, b: &[T]) -> Result<T> {
        let mut w = b.to_vec();
        self.whiten_vec_in_place(&mut w)?;
        Ok(w.iter().map(|&x| x * x).sum())
    }

    pub(crate) fn solve_view(&self, b: &mut StridedMut<'_, T>) {
        let n = self.dim();
        debug_assert_eq!(b.rows(), n);
        kernels::trsm_lower(self.lower.as_slice(), n, b);
        kernels::trsm_lower_transpose(self.lower.as_slice(), n, b);
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "factor dimension vs right-hand side",
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}
