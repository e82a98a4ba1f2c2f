use super::{spd_factorize_with, Matrix};
use crate::scalar::Scalar;

/// Orthonormal factor `Q` of `g = Q R` with `diag(R) > 0`, for square or tall `g`
/// of full column rank.
///
/// Runs Cholesky-QR twice (two Gram products and two triangular solves, all
/// gemm-bound) and falls back to Householder reflections when the Gram matrix
/// is too ill-conditioned to factor.
pub fn orthonormalize<T: Scalar>(g: &Matrix<T>) -> Matrix<T> {
    assert!(g.rows() >= g.cols(), "orthonormalize needs rows >= cols");
    match cholesky_qr(g).and_then(|q1| cholesky_qr(&q1)) {
        Some(q) => q,
        None => householder_q(g),
    }
}

fn cholesky_qr<T: Scalar>(g: &Matrix<T>) -> Option<Matrix<T>> {
    let mut gram = g.transpose_matmul(g).ok()?;
    gram.symmetrize();
    let factor = spd_factorize_with(&gram, T::lit(1e-13)).ok()?;
    let mut q = g.clone();
    factor.whiten_rows_in_place(q.as_mut_slice(), g.rows());
    Some(q)
}

fn householder_q<T: Scalar>(g: &Matrix<T>) -> Matrix<T> {
    let (m, n) = g.shape();
    let mut a = g.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    let two = T::lit(2.0);
    for k in 0..n {
        let norm = (k..m).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
        let x0 = a[(k, k)];
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if vnorm > T::zero() {
            v.iter_mut().for_each(|x| *x /= vnorm);
            apply_reflector(&mut a, &v, k, two);
        }
        // R_kk = alpha after reflection; flip columns of Q so it is positive.
        signs.push(if a[(k, k)] < T::zero() { -T::one() } else { T::one() });
        reflectors.push(v);
    }
    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { T::one() } else { T::zero() });
    for k in (0..n).rev() {
        apply_reflector(&mut q, &reflectors[k], k, two);
    }
    for i in 0..m {
        for (j, &s) in signs.iter().enumerate() {
            q[(i, j)] *= s;
        }
    }
    q
}

/// `A[k.., k..] -= 2 v (v^T A[k.., k..])` for unit `v`.
fn apply_reflector<T: Scalar>(a: &mut Matrix<T>, v: &[T], k: usize, two: T) {
    let cols = a.cols();
    let mut w = vec![T::zero(); cols - k.min(cols)];
    for (vi, i) in v.iter().zip(k..) {
        for (wj, &aij) in w.iter_mut().zip(&a.row(i)[k..]) {
            *wj += *vi * aij;
        }
    }
    for (vi, i) in v.iter().zip(k..) {
        let s = two * *vi;
        for (aij, &wj) in a.row_mut(i)[k..].iter_mut().zip(&w) {
            *aij -= s * wj;
        }
    }
}

/// Relative Frobenius distance from a `cr x cr` matrix (in column-major
/// `vec` order of `c x r` matrices) to its nearest Kronecker product
/// `A ⊗ B` with `A` `r x r` and `B` `c x c`.
///
/// Uses the rearrangement that maps `A ⊗ B` to the rank-one matrix
/// `vec(A) vec(B)^T`; the squared residual is `||Σ||_F^2 - σ_1^2`, with the
/// top singular value obtained by power iteration on the smaller Gram matrix.
pub fn nearest_kronecker_residual<T: Scalar>(sigma: &Matrix<T>, c: usize, r: usize) -> T {
    let d = c * r;
    assert_eq!(sigma.shape(), (d, d), "covariance must be (c r) x (c r)");
    // Row (p, q) of the rearrangement holds vec of block (p, q).
    let rearranged = Matrix::from_fn(r * r, c * c, |row, col| {
        let (p, q) = (row % r, row / r);
        let (i, j) = (col % c, col / c);
        sigma[(p * c + i, q * c + j)]
    });
    let total = sigma.frobenius_norm();
    if total == T::zero() {
        return T::zero();
    }
    // Project the rearrangement onto its top singular direction on the
    // smaller side and measure what is left explicitly.
    let rows_side = r * r <= c * c;
    let gram = if rows_side {
        rearranged.matmul_transpose(&rearranged)
    } else {
        rearranged.transpose_matmul(&rearranged)
    }
    .expect("conformable");
    let u = top_eigenvector(&gram);
    let resid = if rows_side {
        // R - u (u^T R)
        let ut_r: Vec<T> = (0..c * c)
            .map(|j| (0..r * r).map(|i| u[i] * rearranged[(i, j)]).sum())
            .collect();
        Matrix::from_fn(r * r, c * c, |i, j| rearranged[(i, j)] - u[i] * ut_r[j])
    } else {
        // R - (R v) v^T
        let rv = rearranged.mul_vec(&u).expect("conformable");
        Matrix::from_fn(r * r, c * c, |i, j| rearranged[(i, j)] - rv[i] * u[j])
    };
    resid.frobenius_norm() / total
}

/// Unit eigenvector of the largest eigenvalue of a symmetric positive
/// semi-definite matrix, by power iteration.
fn top_eigenvector<T: Scalar>(gram: &Matrix<T>) -> Vec<T> {
    let n = gram.rows();
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(1e-3) * T::from_usize_lossy(i % 7))
        .collect();
    let normalize = |v: &mut Vec<T>| {
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm > T::zero() {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        norm
    };
    normalize(&mut v);
    let mut lambda = T::zero();
    for _ in 0..20_000 {
        let mut w = gram.mul_vec(&v).expect("square");
        let next = normalize(&mut w);
        if next == T::zero() {
            return v;
        }
        let converged = (next - lambda).abs() <= T::lit(1e-14) * next;
        lambda = next;
        v = w;
        if converged {
            break;
        }
    }
    v
}
