//! Monte Carlo check of how the estimation error of the two distances grows
//! with the matrix size `c = r` and the sample size `N`.
//!
//! Only the exponents of the rates are testable; their constants are not
//! pinned down, so the report carries fitted log-log slopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::{msd_matrix, msd_vector_of_dataset};
use crate::distributions::{random_spd, sample_matnormal, sample_standard_normal, RngStream, DEFAULT_CONDITION_CAP};
use crate::error::{Error, Result};
use crate::estimation::{flipflop_mle, mvn_mle, FlipFlopConfig};
use crate::linalg::{vectorize, Matrix};
use crate::params::MatNormalParams;

/// Note attached to every report.
pub const RATE_NOTE: &str =
    "rates hold in probability with unspecified constants; only the fitted exponents are meaningful";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateGrid {
    pub c_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub probe_samples: usize,
}

impl Default for RateGrid {
    fn default() -> Self {
        Self {
            c_values: vec![2, 4, 8],
            n_values: vec![250, 1000, 4000],
            replications: 200,
            probe_samples: 100,
        }
    }
}

impl RateGrid {
    pub fn validate(&self) -> Result<()> {
        let increasing = |v: &[usize]| !v.is_empty() && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.c_values) || self.c_values[0] == 0 {
            return Err(Error::InvalidInput("c values must be positive and strictly increasing".into()));
        }
        if !increasing(&self.n_values) {
            return Err(Error::InvalidInput("N values must be nonempty and strictly increasing".into()));
        }
        let c_max = *self.c_values.last().unwrap();
        let n_min = self.n_values[0];
        if n_min <= c_max * c_max {
            return Err(Error::InvalidInput(format!(
                "every cell needs N > c^2, but N = {n_min} and c = {c_max}"
            )));
        }
        if self.replications == 0 || self.probe_samples == 0 {
            return Err(Error::InvalidInput("replications and probe samples must be >= 1".into()));
        }
        Ok(())
    }

    fn max_redraws(&self) -> usize {
        self.replications.div_ceil(20)
    }
}

/// Mean of a per-replication quantity and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStat {
    pub mean: f64,
    pub se: f64,
}

impl CellStat {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCell {
    pub c: usize,
    pub n: usize,
    /// Mean over probes of `|Δ̂_M - Δ_M|`.
    pub matrix_msd_error: CellStat,
    /// Mean over probes of `|Δ̂ - Δ|`.
    pub vector_msd_error: CellStat,
    /// `||μ̂ - μ||_2`, equal to `||M̂ - M||_F`.
    pub mean_error: CellStat,
    /// `||Σ̂_c - Σ_c||_F` with both normalized to trace `c`.
    pub col_cov_error: CellStat,
    /// `||Σ̂_r - Σ_r||_F` under the same normalization.
    pub row_cov_error: CellStat,
    /// `||Σ̂ - Σ_r ⊗ Σ_c||_F` for the unstructured fit.
    pub vector_cov_error: CellStat,
    pub redraws: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub grid: RateGrid,
    pub seed: u64,
    pub cells: Vec<RateCell>,
    /// `None` when the grid has a single `c` level.
    pub slope_vs_c_vector: Option<SlopeFit>,
    pub slope_vs_c_matrix: Option<SlopeFit>,
    /// `None` when the grid has a single `N` level.
    pub slope_vs_n_vector: Option<SlopeFit>,
    pub slope_vs_n_matrix: Option<SlopeFit>,
    /// Parameter-error slopes against `N`, keyed by quantity name.
    pub parameter_slopes_vs_n: Vec<(String, Option<SlopeFit>)>,
    pub insufficient_grid: bool,
    pub total_redraws: usize,
    pub note: String,
}

struct Replication {
    matrix_msd: f64,
    vector_msd: f64,
    mean: f64,
    col_cov: f64,
    row_cov: f64,
    vector_cov: f64,
}

fn frobenius_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    a.sub(b).expect("same shape").frobenius_norm()
}

fn replicate(c: usize, n: usize, probes: usize, stream: RngStream) -> Result<Replication> {
    let cap = DEFAULT_CONDITION_CAP;
    let mean = Matrix::from_vec(c, c, sample_standard_normal(stream.split(0), c * c))?;
    let truth = MatNormalParams::new(
        mean,
        random_spd(stream.split(1), c, cap)?,
        random_spd(stream.split(2), c, cap)?,
    )?
    .normalized();
    let train = sample_matnormal(stream.split(3), &truth, n)?;
    let probe = sample_matnormal(stream.split(4), &truth, probes)?;

    let fit = flipflop_mle(&train, &FlipFlopConfig::default())?;
    let vec_fit = mvn_mle(&train.vectorized())?;

    let true_msd = msd_matrix(&probe, &truth)?;
    let mat_msd = msd_matrix(&probe, &fit.params)?;
    let vec_msd = msd_vector_of_dataset(&probe, &vec_fit)?;
    let mean_abs = |a: &[f64]| {
        a.iter()
            .zip(&true_msd.values)
            .map(|(x, t)| (x - t).abs())
            .sum::<f64>()
            / probes as f64
    };
    let true_mean = vectorize(&truth.mean);
    Ok(Replication {
        matrix_msd: mean_abs(&mat_msd.values),
        vector_msd: mean_abs(&vec_msd.values),
        mean: vec_fit
            .mean
            .iter()
            .zip(&true_mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        col_cov: frobenius_diff(&fit.params.col_cov, &truth.col_cov),
        row_cov: frobenius_diff(&fit.params.row_cov, &truth.row_cov),
        vector_cov: frobenius_diff(&vec_fit.cov, &truth.kron_cov()),
    })
}

/// Runs every (c, N) cell of `grid` and fits the log-log slopes.
///
/// Replication `k` of cell `j` draws from the stream `(seed, 0)` split along
/// `[j, k, attempt]`, so the report does not depend on the thread count.
/// A replication whose fit fails is redrawn; more than 5% redraws in a cell
/// abort the run.
pub fn run_rate_experiment(grid: &RateGrid, seed: u64) -> Result<RateReport> {
    grid.validate()?;
    let root = RngStream::new(seed, 0);
    let cell_dims: Vec<(usize, usize)> = grid
        .c_values
        .iter()
        .flat_map(|&c| grid.n_values.iter().map(move |&n| (c, n)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cell_dims.len())
        .flat_map(|j| (0..grid.replications).map(move |k| (j, k)))
        .collect();
    let cap = grid.max_redraws();
    let outcomes: Vec<Result<(Replication, usize)>> = jobs
        .par_iter()
        .map(|&(j, k)| {
            let (c, n) = cell_dims[j];
            let mut last_err = None;
            for attempt in 0..=cap {
                let stream = root.derive(&[j as u64, k as u64, attempt as u64]);
                match replicate(c, n, grid.probe_samples, stream) {
                    Ok(r) => return Ok((r, attempt)),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.expect("at least one attempt"))
        })
        .collect();

    let mut cells = Vec::with_capacity(cell_dims.len());
    let mut outcomes = outcomes.into_iter();
    for &(c, n) in &cell_dims {
        let mut reps = Vec::with_capacity(grid.replications);
        let mut redraws = 0;
        for _ in 0..grid.replications {
            let (r, attempts) = outcomes.next().expect("one outcome per job")?;
            redraws += attempts;
            reps.push(r);
        }
        if redraws > cap {
            return Err(Error::InvalidInput(format!(
                "cell c = {c}, N = {n} needed {redraws} redraws (cap {cap})"
            )));
        }
        let stat = |f: fn(&Replication) -> f64| CellStat::of(&reps.iter().map(f).collect::<Vec<_>>());
        cells.push(RateCell {
            c,
            n,
            matrix_msd_error: stat(|r| r.matrix_msd),
            vector_msd_error: stat(|r| r.vector_msd),
            mean_error: stat(|r| r.mean),
            col_cov_error: stat(|r| r.col_cov),
            row_cov_error: stat(|r| r.row_cov),
            vector_cov_error: stat(|r| r.vector_cov),
            redraws,
        });
    }

    let vs_c = |f: fn(&RateCell) -> CellStat| averaged_slope(&cells, &grid.n_values, |cell| cell.n, |cell| cell.c, f);
    let vs_n = |f: fn(&RateCell) -> CellStat| averaged_slope(&cells, &grid.c_values, |cell| cell.c, |cell| cell.n, f);
    let parameter_slopes_vs_n = vec![
        ("mean".to_string(), vs_n(|c| c.mean_error)),
        ("col_cov".to_string(), vs_n(|c| c.col_cov_error)),
        ("row_cov".to_string(), vs_n(|c| c.row_cov_error)),
        ("vector_cov".to_string(), vs_n(|c| c.vector_cov_error)),
    ];
    let total_redraws = cells.iter().map(|c| c.redraws).sum();
    Ok(RateReport {
        grid: grid.clone(),
        seed,
        slope_vs_c_vector: vs_c(|c| c.vector_msd_error),
        slope_vs_c_matrix: vs_c(|c| c.matrix_msd_error),
        slope_vs_n_vector: vs_n(|c| c.vector_msd_error),
        slope_vs_n_matrix: vs_n(|c| c.matrix_msd_error),
        parameter_slopes_vs_n,
        insufficient_grid: grid.c_values.len() < 2 || grid.n_values.len() < 2,
        total_redraws,
        cells,
        note: RATE_NOTE.to_string(),
    })
}

/// OLS slope of `ln(mean)` on `ln(x)` within each level of the held-fixed
/// variable, averaged over levels. The standard error propagates each cell's
/// standard error through `se(ln m) ≈ se(m) / m`.
fn averaged_slope(
    cells: &[RateCell],
    levels: &[usize],
    fixed: impl Fn(&RateCell) -> usize,
    varying: impl Fn(&RateCell) -> usize,
    stat: impl Fn(&RateCell) -> CellStat,
) -> Option<SlopeFit> {
    let mut slopes = Vec::new();
    let mut vars = Vec::new();
    for &level in levels {
        let pts: Vec<(f64, f64, f64)> = cells
            .iter()
            .filter(|c| fixed(c) == level)
            .map(|c| {
                let s = stat(c);
                ((varying(c) as f64).ln(), s.mean.ln(), s.se / s.mean)
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let xbar = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let sxx: f64 = pts.iter().map(|p| (p.0 - xbar) * (p.0 - xbar)).sum();
        let slope = pts.iter().map(|p| (p.0 - xbar) * p.1).sum::<f64>() / sxx;
        let var = pts.iter().map(|p| ((p.0 - xbar) / sxx).powi(2) * p.2 * p.2).sum::<f64>();
        slopes.push(slope);
        vars.push(var);
    }
    let l = slopes.len() as f64;
    Some(SlopeFit {
        slope: slopes.iter().sum::<f64>() / l,
        se: vars.iter().sum::<f64>().sqrt() / l,
    })
}
