//! MHealy, DD and Healy-type plot series, their alignment summaries, and the
//! separability likelihood-ratio test.

use serde::{Deserialize, Serialize};

use crate::dataset::MatrixDataset;
use crate::distances::{msd_matrix, msd_vector_of_dataset, MsdVector};
use crate::distributions::ChiSquare;
use crate::error::{Error, Result, SingularReason};
use crate::estimation::{flipflop_mle, mvn_fit, Denominator, FlipFlopConfig};
use crate::linalg::spd_factorize;
use crate::params::{MatNormalParams, MvnParams};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Mhealy,
    Dd,
    HealyType,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::Mhealy => "mhealy",
            PlotKind::Dd => "dd",
            PlotKind::HealyType => "healy_type",
        }
    }
}

/// Reference line drawn with every plot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceLine {
    #[default]
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotMeta {
    pub n_samples: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub dof: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries<T> {
    pub kind: PlotKind,
    pub points: Vec<(T, T)>,
    pub reference: ReferenceLine,
    pub meta: PlotMeta,
}

/// Horizontal positions of a probability plot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlottingPosition {
    /// `n / N`, ending exactly at 1.
    #[default]
    Nominal,
    /// `n / (N + 1)`.
    Weibull,
}

/// Chi-square probability plot of a batch of distances: sorted ascending
/// (stable), `y_n = F_dof(Δ_(n))`, `x_n` from `position`.
pub fn probability_series<T: Scalar>(
    msd: &MsdVector<T>,
    kind: PlotKind,
    meta: PlotMeta,
    position: PlottingPosition,
) -> Result<PlotSeries<T>> {
    let dist = ChiSquare::new(msd.dof as u64)?;
    let mut sorted = msd.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let n = sorted.len();
    let denom = T::from_usize_lossy(match position {
        PlottingPosition::Nominal => n,
        PlottingPosition::Weibull => n + 1,
    });
    let points = sorted
        .into_iter()
        .enumerate()
        .map(|(i, q)| (T::from_usize_lossy(i + 1) / denom, dist.cdf(q)))
        .collect();
    Ok(PlotSeries {
        kind,
        points,
        reference: ReferenceLine::Identity,
        meta,
    })
}

fn meta_of<T: Scalar>(data: &MatrixDataset<T>) -> PlotMeta {
    PlotMeta {
        n_samples: data.n_samples(),
        n_rows: data.n_rows(),
        n_cols: data.n_cols(),
        dof: data.dim(),
    }
}

/// MHealy plot: chi-square probabilities of the sorted matrix-based
/// distances against `n / N`.
pub fn mhealy_series<T: Scalar>(data: &MatrixDataset<T>, fitted: &MatNormalParams<T>) -> Result<PlotSeries<T>> {
    mhealy_series_with(data, fitted, PlottingPosition::Nominal)
}

pub fn mhealy_series_with<T: Scalar>(
    data: &MatrixDataset<T>,
    fitted: &MatNormalParams<T>,
    position: PlottingPosition,
) -> Result<PlotSeries<T>> {
    let msd = msd_matrix(data, fitted)?;
    probability_series(&msd, PlotKind::Mhealy, meta_of(data), position)
}

/// Healy-type plot: the MHealy construction on vector-based distances of
/// the vectorized samples with `χ²_d`.
pub fn healy_type_series<T: Scalar>(data: &MatrixDataset<T>, fitted: &MvnParams<T>) -> Result<PlotSeries<T>> {
    healy_type_series_with(data, fitted, PlottingPosition::Nominal)
}

pub fn healy_type_series_with<T: Scalar>(
    data: &MatrixDataset<T>,
    fitted: &MvnParams<T>,
    position: PlottingPosition,
) -> Result<PlotSeries<T>> {
    let msd = msd_vector_of_dataset(data, fitted)?;
    probability_series(&msd, PlotKind::HealyType, meta_of(data), position)
}

/// DD plot: `(Δ_M(X_n), Δ(vec X_n))` in sample order.
pub fn dd_series<T: Scalar>(
    data: &MatrixDataset<T>,
    fitted_mat: &MatNormalParams<T>,
    fitted_vec: &MvnParams<T>,
) -> Result<PlotSeries<T>> {
    let m = msd_matrix(data, fitted_mat)?;
    let v = msd_vector_of_dataset(data, fitted_vec)?;
    Ok(PlotSeries {
        kind: PlotKind::Dd,
        points: m.values.into_iter().zip(v.values).collect(),
        reference: ReferenceLine::Identity,
        meta: meta_of(data),
    })
}

/// Distance of a plot from its reference line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentStats<T> {
    pub max_abs_dev: T,
    pub mean_abs_dev: T,
    /// Two-sided Kolmogorov distance between the plotted probabilities and
    /// the uniform step function; only defined for probability plots.
    pub ks_like_stat: Option<T>,
}

/// Max and mean `|y - x|`; DD deviations are divided by the degrees of
/// freedom first.
pub fn alignment<T: Scalar>(series: &PlotSeries<T>) -> Result<AlignmentStats<T>> {
    if series.points.is_empty() {
        return Err(Error::InvalidInput("alignment of an empty series".into()));
    }
    let scale = match series.kind {
        PlotKind::Dd => T::one() / T::from_usize_lossy(series.meta.dof.max(1)),
        _ => T::one(),
    };
    let devs: Vec<T> = series.points.iter().map(|&(x, y)| (y - x).abs() * scale).collect();
    let max_abs_dev = devs.iter().fold(T::zero(), |a, &b| a.max(b));
    let mean_abs_dev = devs.iter().copied().sum::<T>() / T::from_usize_lossy(devs.len());
    let ks_like_stat = match series.kind {
        PlotKind::Dd => None,
        _ => {
            let n = T::from_usize_lossy(series.points.len());
            Some(series.points.iter().enumerate().fold(T::zero(), |acc, (i, &(_, y))| {
                let lo = T::from_usize_lossy(i) / n;
                let hi = T::from_usize_lossy(i + 1) / n;
                acc.max((y - lo).abs()).max((hi - y).abs())
            }))
        }
    };
    Ok(AlignmentStats {
        max_abs_dev,
        mean_abs_dev,
        ks_like_stat,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrtResult<T> {
    pub statistic: T,
    pub dof: u64,
    pub p_value: T,
}

/// Degrees of freedom of the separability test:
/// `cr(cr+1)/2 - [c(c+1)/2 + r(r+1)/2 - 1]`.
pub fn separability_dof(n_rows: usize, n_cols: usize) -> u64 {
    let (c, r) = (n_rows as u64, n_cols as u64);
    let d = c * r;
    d * (d + 1) / 2 - (c * (c + 1) / 2 + r * (r + 1) / 2 - 1)
}

/// Likelihood-ratio test of `Σ = Σ_r ⊗ Σ_c` against an unstructured `Σ`.
///
/// The statistic is `N (c ln|Σ̂_r| + r ln|Σ̂_c| - ln|Σ̂|)` with the flip-flop
/// fit and the unstructured fit using the `1/N` divisor, referred to `χ²`
/// with [`separability_dof`] degrees of freedom.
pub fn separability_lrt<T: Scalar>(data: &MatrixDataset<T>) -> Result<LrtResult<T>> {
    separability_lrt_with(data, &FlipFlopConfig::default())
}

pub fn separability_lrt_with<T: Scalar>(data: &MatrixDataset<T>, config: &FlipFlopConfig) -> Result<LrtResult<T>> {
    let (n, c, r) = (data.n_samples(), data.n_rows(), data.n_cols());
    let dof = separability_dof(c, r);
    if dof == 0 {
        return Err(Error::DegenerateTest(format!(
            "separable and unstructured models coincide for c = {c}, r = {r} (0 degrees of freedom)"
        )));
    }
    if n <= c * r {
        return Err(Error::CovarianceSingular(SingularReason::DimensionNotBelowSamples {
            dim: c * r,
            samples: n,
        }));
    }
    let unstructured = mvn_fit(&data.vectorized(), Denominator::MaximumLikelihood)?;
    let logdet_full = spd_factorize(&unstructured.cov)?.log_determinant();
    let fit = flipflop_mle(data, config)?;
    let f = fit.params.factors()?;
    let (nf, cf, rf) = (
        T::from_usize_lossy(n),
        T::from_usize_lossy(c),
        T::from_usize_lossy(r),
    );
    let statistic = (nf * (cf * f.row.log_determinant() + rf * f.col.log_determinant() - logdet_full))
        .max(T::zero());
    let dist = ChiSquare::new(dof)?;
    Ok(LrtResult {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}
