//! Strided views and the blocked dense kernels (gemm, triangular solves,
//! Cholesky) used by the rest of the crate.

use std::marker::PhantomData;

use crate::scalar::Scalar;

const BLOCK: usize = 64;

fn fits(len: usize, rows: usize, cols: usize, rs: usize, cs: usize) -> bool {
    rows == 0 || cols == 0 || (rows - 1) * rs + (cols - 1) * cs < len
}

/// Read-only strided matrix view.
#[derive(Clone, Copy)]
pub(crate) struct Strided<'a, T> {
    data: &'a [T],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, T: Scalar> Strided<'a, T> {
    pub(crate) fn new(data: &'a [T], rows: usize, cols: usize, rs: usize, cs: usize) -> Self {
        assert!(fits(data.len(), rows, cols, rs, cs), "strided view out of bounds");
        Self {
            data,
            rows,
            cols,
            rs,
            cs,
        }
    }

    pub(crate) fn t(self) -> Self {
        Self {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
        }
    }
}

/// Mutable strided matrix view.
pub(crate) struct StridedMut<'a, T> {
    ptr: *mut T,
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
    _marker: PhantomData<&'a mut T>,
}

impl<'a, T: Scalar> StridedMut<'a, T> {
    pub(crate) fn new(data: &'a mut [T], rows: usize, cols: usize, rs: usize, cs: usize) -> Self {
        assert!(fits(data.len(), rows, cols, rs, cs), "strided view out of bounds");
        Self {
            ptr: data.as_mut_ptr(),
            rows,
            cols,
            rs,
            cs,
            _marker: PhantomData,
        }
    }

    pub(crate) fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    unsafe fn at(&self, i: usize, j: usize) -> *mut T {
        self.ptr.add(i * self.rs + j * self.cs)
    }
}

/// `c <- alpha * a * b + beta * c`.
pub(crate) fn gemm<T: Scalar>(
    alpha: T,
    a: Strided<'_, T>,
    b: Strided<'_, T>,
    beta: T,
    c: &mut StridedMut<'_, T>,
) {
    assert_eq!(a.cols, b.rows, "gemm inner dimension");
    assert_eq!((a.rows, b.cols), (c.rows, c.cols), "gemm output shape");
    // SAFETY: views were bounds-checked on construction; `c` is uniquely
    // borrowed so it cannot alias `a` or `b`.
    unsafe {
        gemm_ptr(
            a.rows,
            a.cols,
            b.cols,
            alpha,
            a.data.as_ptr(),
            a.rs,
            a.cs,
            b.data.as_ptr(),
            b.rs,
            b.cs,
            beta,
            c.ptr,
            c.rs,
            c.cs,
        );
    }
}

const GRAM_BLOCK: usize = 256;

/// `c <- alpha * a * a^T`. Only lower blocks are multiplied; the upper
/// triangle is mirrored, so the result is exactly symmetric.
pub(crate) fn gram<T: Scalar>(alpha: T, a: Strided<'_, T>, c: &mut StridedMut<'_, T>) {
    let (m, k) = (a.rows, a.cols);
    assert_eq!((c.rows, c.cols), (m, m), "gram output shape");
    let mut i0 = 0;
    while i0 < m {
        let bi = GRAM_BLOCK.min(m - i0);
        let mut j0 = 0;
        while j0 <= i0 {
            let bj = GRAM_BLOCK.min(m - j0);
            // SAFETY: block offsets stay inside the checked views; `c` is
            // uniquely borrowed.
            unsafe {
                gemm_ptr(
                    bi,
                    k,
                    bj,
                    alpha,
                    a.data.as_ptr().add(i0 * a.rs),
                    a.rs,
                    a.cs,
                    a.data.as_ptr().add(j0 * a.rs),
                    a.cs,
                    a.rs,
                    T::zero(),
                    c.at(i0, j0),
                    c.rs,
                    c.cs,
                );
            }
            j0 += GRAM_BLOCK;
        }
        i0 += GRAM_BLOCK;
    }
    for i in 0..m {
        for j in i + 1..m {
            // SAFETY: i, j < m.
            unsafe { *c.at(i, j) = *c.at(j, i) };
        }
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn gemm_ptr<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    alpha: T,
    a: *const T,
    rsa: usize,
    csa: usize,
    b: *const T,
    rsb: usize,
    csb: usize,
    beta: T,
    c: *mut T,
    rsc: usize,
    csc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for i in 0..m {
            for j in 0..n {
                let p = c.add(i * rsc + j * csc);
                *p = if beta == T::zero() { T::zero() } else { *p * beta };
            }
        }
        return;
    }
    T::gemm_raw(
        m,
        k,
        n,
        alpha,
        a,
        rsa as isize,
        csa as isize,
        b,
        rsb as isize,
        csb as isize,
        beta,
        c,
        rsc as isize,
        csc as isize,
    );
}

/// Rows at or below which triangular solves fall back to scalar loops.
const TRSM_BASE: usize = 8;

/// Solves `L X = B` in place; `l` is row-major `n x n` lower triangular.
///
/// Recursive halving keeps almost all work in gemm updates.
pub(crate) fn trsm_lower<T: Scalar>(l: &[T], n: usize, b: &mut StridedMut<'_, T>) {
    assert_eq!(l.len(), n * n);
    assert_eq!(b.rows, n);
    // SAFETY: every access stays inside rows 0..n of the checked view.
    unsafe { trsm_lower_rec(l, n, 0, n, b) }
}

unsafe fn trsm_lower_rec<T: Scalar>(l: &[T], ld: usize, k0: usize, n: usize, b: &mut StridedMut<'_, T>) {
    let m = b.cols;
    if n <= TRSM_BASE {
        let e = k0 + n;
        if b.rs <= b.cs {
            for col in 0..m {
                for i in k0..e {
                    let mut s = *b.at(i, col);
                    for j in k0..i {
                        s -= l[i * ld + j] * *b.at(j, col);
                    }
                    *b.at(i, col) = s / l[i * ld + i];
                }
            }
        } else {
            for i in k0..e {
                for j in k0..i {
                    let lij = l[i * ld + j];
                    if lij != T::zero() {
                        for col in 0..m {
                            *b.at(i, col) -= lij * *b.at(j, col);
                        }
                    }
                }
                let inv = T::one() / l[i * ld + i];
                for col in 0..m {
                    *b.at(i, col) *= inv;
                }
            }
        }
        return;
    }
    let h = n / 2;
    trsm_lower_rec(l, ld, k0, h, b);
    // B2 -= L21 X1
    gemm_ptr(
        n - h,
        h,
        m,
        -T::one(),
        l.as_ptr().add((k0 + h) * ld + k0),
        ld,
        1,
        b.at(k0, 0),
        b.rs,
        b.cs,
        T::one(),
        b.at(k0 + h, 0),
        b.rs,
        b.cs,
    );
    trsm_lower_rec(l, ld, k0 + h, n - h, b);
}

/// Solves `L^T X = B` in place; `l` is row-major `n x n` lower triangular.
pub(crate) fn trsm_lower_transpose<T: Scalar>(l: &[T], n: usize, b: &mut StridedMut<'_, T>) {
    assert_eq!(l.len(), n * n);
    assert_eq!(b.rows, n);
    // SAFETY: every access stays inside rows 0..n of the checked view.
    unsafe { trsm_lower_transpose_rec(l, n, 0, n, b) }
}

unsafe fn trsm_lower_transpose_rec<T: Scalar>(
    l: &[T],
    ld: usize,
    k0: usize,
    n: usize,
    b: &mut StridedMut<'_, T>,
) {
    let m = b.cols;
    if n <= TRSM_BASE {
        let e = k0 + n;
        if b.rs <= b.cs {
            for col in 0..m {
                for i in (k0..e).rev() {
                    let mut s = *b.at(i, col);
                    for j in i + 1..e {
                        s -= l[j * ld + i] * *b.at(j, col);
                    }
                    *b.at(i, col) = s / l[i * ld + i];
                }
            }
        } else {
            for i in (k0..e).rev() {
                for j in i + 1..e {
                    let lji = l[j * ld + i];
                    if lji != T::zero() {
                        for col in 0..m {
                            *b.at(i, col) -= lji * *b.at(j, col);
                        }
                    }
                }
                let inv = T::one() / l[i * ld + i];
                for col in 0..m {
                    *b.at(i, col) *= inv;
                }
            }
        }
        return;
    }
    let h = n / 2;
    trsm_lower_transpose_rec(l, ld, k0 + h, n - h, b);
    // B1 -= (L21)^T X2
    gemm_ptr(
        h,
        n - h,
        m,
        -T::one(),
        l.as_ptr().add((k0 + h) * ld + k0),
        1,
        ld,
        b.at(k0 + h, 0),
        b.rs,
        b.cs,
        T::one(),
        b.at(k0, 0),
        b.rs,
        b.cs,
    );
    trsm_lower_transpose_rec(l, ld, k0, h, b);
}

/// Outcome of an in-place Cholesky attempt.
pub(crate) enum CholeskyOutcome<T> {
    /// Pivots (squared diagonal of the factor), in order.
    Factored(Vec<T>),
    Failed { index: usize, pivot: T },
}

/// Blocked right-looking Cholesky on a row-major `n x n` buffer. On success
/// the lower triangle holds `L` and the strict upper triangle is zeroed.
/// A pivot fails when it is not above `threshold` (or not finite).
pub(crate) fn cholesky_in_place<T: Scalar>(a: &mut [T], n: usize, threshold: T) -> CholeskyOutcome<T> {
    assert_eq!(a.len(), n * n);
    let mut pivots = Vec::with_capacity(n);
    let mut kb = 0;
    while kb < n {
        let e = (kb + BLOCK).min(n);
        for j in kb..e {
            let mut d = a[j * n + j];
            for p in kb..j {
                d -= a[j * n + p] * a[j * n + p];
            }
            if !(d > threshold) || !d.is_finite() {
                return CholeskyOutcome::Failed { index: j, pivot: d };
            }
            pivots.push(d);
            let ljj = d.sqrt();
            a[j * n + j] = ljj;
            for i in j + 1..e {
                let mut s = a[i * n + j];
                for p in kb..j {
                    s -= a[i * n + p] * a[j * n + p];
                }
                a[i * n + j] = s / ljj;
            }
        }
        if e < n {
            // Panel: A21 <- A21 * L11^{-T}, row by row.
            for i in e..n {
                for j in kb..e {
                    let mut s = a[i * n + j];
                    for p in kb..j {
                        s -= a[i * n + p] * a[j * n + p];
                    }
                    a[i * n + j] = s / a[j * n + j];
                }
            }
            // Trailing update: A22 -= A21 * A21^T.
            // SAFETY: A21 (columns kb..e) and A22 (columns e..n) are disjoint.
            unsafe {
                let base = a.as_mut_ptr();
                gemm_ptr(
                    n - e,
                    e - kb,
                    n - e,
                    -T::one(),
                    base.add(e * n + kb),
                    n,
                    1,
                    base.add(e * n + kb),
                    1,
                    n,
                    T::one(),
                    base.add(e * n + e),
                    n,
                    1,
                );
            }
        }
        kb = e;
    }
    for i in 0..n {
        for j in i + 1..n {
            a[i * n + j] = T::zero();
        }
    }
    CholeskyOutcome::Factored(pivots)
}
