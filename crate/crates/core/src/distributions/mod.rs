//! Seeded sampling of normal data, random covariance generators and the
//! chi-square law.

mod chi2;
mod rng;
mod sampling;

pub use chi2::{gamma_p, gamma_q, ln_gamma, ChiSquare};
pub use rng::RngStream;
pub use sampling::{
    random_nonkron_spd, random_spd, sample_matnormal, sample_mvn, sample_mvn_matrices,
    sample_standard_normal, PermutedKronecker, DEFAULT_CONDITION_CAP, NONKRON_MAX_DRAWS,
    NONKRON_MIN_RESIDUAL,
};

use crate::scalar::Scalar;

/// `P(X <= x)` for `X ~ χ²_dof`; `0` for negative `x`.
pub fn chi2_cdf<T: Scalar>(dist: ChiSquare, x: T) -> T {
    dist.cdf(x)
}

/// `P(X > x)` for `X ~ χ²_dof`.
pub fn chi2_sf<T: Scalar>(dist: ChiSquare, x: T) -> T {
    dist.sf(x)
}
