//! Chi-square distribution via the regularized incomplete gamma function.
//!
//! Evaluation is done in `f64` regardless of the caller's scalar width.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-17;

/// Chi-square law with `dof >= 1` degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiSquare {
    dof: u64,
}

impl ChiSquare {
    pub fn new(dof: u64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::InvalidInput("chi-square needs dof >= 1".into()));
        }
        Ok(Self { dof })
    }

    pub fn dof(&self) -> u64 {
        self.dof
    }

    /// `P(X <= x)`; `0` for `x <= 0`, saturating at `1`.
    pub fn cdf<T: Scalar>(&self, x: T) -> T {
        T::lit(gamma_p(self.dof as f64 / 2.0, x.as_f64() / 2.0))
    }

    /// `P(X > x)`, computed without cancellation.
    pub fn sf<T: Scalar>(&self, x: T) -> T {
        T::lit(gamma_q(self.dof as f64 / 2.0, x.as_f64() / 2.0))
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    gamma_pq(a, x).0
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    gamma_pq(a, x).1
}

fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    assert!(a > 0.0, "incomplete gamma needs a > 0");
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x == f64::INFINITY {
        return (1.0, 0.0);
    }
    let log_pref = log_prefactor(a, x);
    if x < a + 1.0 {
        let p = (log_pref + series(a, x).ln()).exp().min(1.0);
        (p, 1.0 - p)
    } else {
        let q = (log_pref + continued_fraction(a, x).ln()).exp().min(1.0);
        (1.0 - q, q)
    }
}

/// `ln(x^a e^{-x} / Γ(a))`.
///
/// For large `a` the three large terms cancel, so the Stirling form
/// `a (ln(1+u) - u) + ½ ln(a / 2π) - corr(a)` with `u = (x - a)/a` is used.
fn log_prefactor(a: f64, x: f64) -> f64 {
    if a >= 10.0 {
        let u = (x - a) / a;
        a * log1p_minus_x(u) + 0.5 * (a / (2.0 * PI)).ln() - stirling_correction(a)
    } else {
        a * x.ln() - x - ln_gamma(a)
    }
}

/// `Σ_{n>=0} x^n / (a (a+1) ... (a+n))`.
fn series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term < sum * EPS {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of the continued fraction for `Q(a, x) e^x x^{-a} Γ(a)`.
fn continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `ln(1 + u) - u`.
fn log1p_minus_x(u: f64) -> f64 {
    if u.abs() < 0.5 {
        // -u^2/2 + u^3/3 - ...
        let mut pow = u * u;
        let mut sum = 0.0;
        let mut k = 2.0;
        loop {
            let term = pow / k;
            if k as i64 % 2 == 0 {
                sum -= term;
            } else {
                sum += term;
            }
            if term.abs() <= sum.abs() * 1e-18 || k > 200.0 {
                break;
            }
            pow *= u;
            k += 1.0;
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

/// `ln Γ(a) - [(a - ½) ln a - a + ½ ln 2π]` for `a >= 10`.
fn stirling_correction(a: f64) -> f64 {
    let inv = 1.0 / a;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0
                - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))))
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 607/128).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 607.0 / 128.0;
    const COEF: [f64; 15] = [
        0.999_999_999_999_997_1,
        57.156_235_665_862_92,
        -59.597_960_355_475_49,
        14.136_097_974_741_746,
        -0.491_913_816_097_620_2,
        3.399_464_998_481_189e-5,
        4.652_362_892_704_858e-5,
        -9.837_447_530_487_956e-5,
        1.580_887_032_249_125e-4,
        -2.102_644_417_241_049e-4,
        2.174_396_181_152_126_4e-4,
        -1.643_181_065_367_639e-4,
        8.441_822_398_385_275e-5,
        -2.619_083_840_158_141e-5,
        3.689_918_265_953_162_7e-6,
    ];
    if x < 0.5 {
        // Reflection.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_correction(x);
    }
    let x = x - 1.0;
    let mut sum = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}
