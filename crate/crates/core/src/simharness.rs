//! Scenario runner for the simulation regimes: matrix-normal and
//! non-Kronecker normal data at sample sizes above, near and below `c r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::MatrixDataset;
use crate::diagnostics::{
    alignment, dd_series, healy_type_series, mhealy_series, separability_lrt, AlignmentStats, LrtResult,
    PlotKind, PlotSeries,
};
use crate::distributions::{
    random_nonkron_spd, random_spd, sample_matnormal, sample_mvn_matrices, sample_standard_normal,
    PermutedKronecker, RngStream, DEFAULT_CONDITION_CAP,
};
use crate::error::{Error, Result};
use crate::estimation::{flipflop_mle, mvn_mle, FlipFlopConfig, FlipFlopReport};
use crate::linalg::Matrix;
use crate::params::{MatNormalParams, MvnParams};

/// Largest `c r` for which the non-Kronecker control uses a dense random
/// covariance; above it the permuted-Kronecker construction is used.
pub const DENSE_STRICT_MAX_DIM: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Matnormal,
    StrictMvn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Mhealy,
    Dd,
    HealyType,
    Lrt,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 4] = [Diagnostic::Mhealy, Diagnostic::Dd, Diagnostic::HealyType, Diagnostic::Lrt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Diagnostic::Mhealy => "mhealy",
            Diagnostic::Dd => "dd",
            Diagnostic::HealyType => "healy_type",
            Diagnostic::Lrt => "lrt",
        }
    }

    /// Whether the diagnostic needs an unstructured `c r x c r` fit.
    pub fn needs_unstructured_fit(&self) -> bool {
        !matches!(self, Diagnostic::Mhealy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub generator: Generator,
    pub n_samples: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub seed: u64,
    #[serde(default = "all_diagnostics")]
    pub diagnostics: Vec<Diagnostic>,
}

fn all_diagnostics() -> Vec<Diagnostic> {
    Diagnostic::ALL.to_vec()
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidInput("scenario name must not be empty".into()));
        }
        if self.name.starts_with('.')
            || !self.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch))
        {
            return Err(Error::InvalidInput(format!(
                "scenario name {:?} must use only ASCII letters, digits, '_', '-' and '.', and not start with '.'",
                self.name
            )));
        }
        if self.n_rows == 0 || self.n_cols == 0 || self.n_samples < 2 {
            return Err(Error::InvalidInput(format!(
                "scenario {}: needs c, r >= 1 and N >= 2",
                self.name
            )));
        }
        if self.generator == Generator::StrictMvn && self.n_rows * self.n_cols < 2 {
            return Err(Error::InvalidInput(format!(
                "scenario {}: the non-Kronecker generator needs c r >= 2",
                self.name
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_rows * self.n_cols
    }
}

/// A requested diagnostic that was not computed, and why.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notice {
    pub diagnostic: Diagnostic,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub plot_series: BTreeMap<PlotKind, PlotSeries<f64>>,
    pub alignment: BTreeMap<PlotKind, AlignmentStats<f64>>,
    pub lrt: Option<LrtResult<f64>>,
    pub notices: Vec<Notice>,
    pub fit_report: FlipFlopReport<f64>,
}

/// A scenario that failed, with what is needed to replay it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioFailure {
    pub name: String,
    pub seed: u64,
    pub kind: String,
    pub message: String,
}

impl std::fmt::Display for ScenarioFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "scenario {} (seed {}) failed: {}", self.name, self.seed, self.message)
    }
}

/// Draws the scenario's data. Parameters come from stream `(seed, 0)`, the
/// samples from `(seed, 1)`.
pub fn generate_data(s: &Scenario) -> Result<MatrixDataset<f64>> {
    let (c, r, n) = (s.n_rows, s.n_cols, s.n_samples);
    let params_stream = RngStream::new(s.seed, 0);
    let data_stream = RngStream::new(s.seed, 1);
    let mean = Matrix::from_vec(c, r, sample_standard_normal(params_stream.split(0), c * r))?;
    match s.generator {
        Generator::Matnormal => {
            let params = MatNormalParams::new(
                mean,
                random_spd(params_stream.split(1), c, DEFAULT_CONDITION_CAP)?,
                random_spd(params_stream.split(2), r, DEFAULT_CONDITION_CAP)?,
            )?;
            sample_matnormal(data_stream, &params, n)
        }
        Generator::StrictMvn if c * r <= DENSE_STRICT_MAX_DIM => {
            let cov = random_nonkron_spd(params_stream.split(3), c, r)?;
            let params = MvnParams::new(crate::linalg::vectorize(&mean), cov)?;
            sample_mvn_matrices(data_stream, &params, n, c, r)
        }
        Generator::StrictMvn => {
            let mut g = PermutedKronecker::random(params_stream.split(4), c, r)?;
            g.base.mean = mean;
            g.sample(data_stream, n)
        }
    }
}

/// Generates, fits and diagnoses one scenario.
///
/// Diagnostics that need an unstructured fit are replaced by a [`Notice`]
/// when `N <= c r`.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult, ScenarioFailure> {
    run_scenario_inner(s).map_err(|e| ScenarioFailure {
        name: s.name.clone(),
        seed: s.seed,
        kind: e.kind().to_string(),
        message: e.to_string(),
    })
}

fn run_scenario_inner(s: &Scenario) -> Result<ScenarioResult> {
    s.validate()?;
    let data = generate_data(s)?;
    let fit = flipflop_mle(&data, &FlipFlopConfig::default())?;
    let feasible = s.n_samples > s.dim();
    let mut requested = s.diagnostics.clone();
    requested.sort();
    requested.dedup();

    let mut plot_series = BTreeMap::new();
    let mut notices = Vec::new();
    let mut lrt = None;
    let mut vec_fit: Option<MvnParams<f64>> = None;
    for diag in requested {
        if diag.needs_unstructured_fit() && !feasible {
            notices.push(Notice {
                diagnostic: diag,
                message: format!(
                    "{} requires N > c r, but N = {} and c r = {}",
                    diag.as_str(),
                    s.n_samples,
                    s.dim()
                ),
            });
            continue;
        }
        if matches!(diag, Diagnostic::Dd | Diagnostic::HealyType) && vec_fit.is_none() {
            vec_fit = Some(mvn_mle(&data.vectorized())?);
        }
        match diag {
            Diagnostic::Mhealy => {
                plot_series.insert(PlotKind::Mhealy, mhealy_series(&data, &fit.params)?);
            }
            Diagnostic::Dd => {
                let v = vec_fit.as_ref().expect("fitted above");
                plot_series.insert(PlotKind::Dd, dd_series(&data, &fit.params, v)?);
            }
            Diagnostic::HealyType => {
                let v = vec_fit.as_ref().expect("fitted above");
                plot_series.insert(PlotKind::HealyType, healy_type_series(&data, v)?);
            }
            Diagnostic::Lrt => match separability_lrt(&data) {
                Ok(res) => lrt = Some(res),
                Err(Error::DegenerateTest(msg)) => notices.push(Notice {
                    diagnostic: diag,
                    message: msg,
                }),
                Err(e) => return Err(e),
            },
        }
    }
    let alignment = plot_series
        .iter()
        .map(|(k, series)| Ok((*k, alignment(series)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(ScenarioResult {
        scenario: s.clone(),
        plot_series,
        alignment,
        lrt,
        notices,
        fit_report: fit,
    })
}

/// Runs scenarios on a pool of `parallelism` workers (0 means the global
/// pool). Results come back in input order and do not depend on the pool size.
pub fn run_suite(
    scenarios: &[Scenario],
    parallelism: usize,
) -> Result<Vec<Result<ScenarioResult, ScenarioFailure>>> {
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!("duplicate scenario name {:?}", w[0])));
    }
    use rayon::prelude::*;
    let run = || scenarios.par_iter().with_max_len(1).map(run_scenario).collect::<Vec<_>>();
    if parallelism == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(run))
}

/// The ten default scenarios: `c = r` in {2, 30} with all diagnostics and in
/// {40, 100, 200} (where the unstructured baselines are infeasible), each
/// under both generators, all at `N = 1000`.
///
/// `max_dim` drops the regimes whose `c` exceeds it, for quick runs.
pub fn default_suite(seed: u64, max_dim: Option<usize>) -> Vec<Scenario> {
    let sizes = [2usize, 30, 40, 100, 200];
    let mut out = Vec::new();
    for (i, &c) in sizes.iter().enumerate() {
        if max_dim.is_some_and(|m| c > m) {
            continue;
        }
        for (j, generator) in [Generator::Matnormal, Generator::StrictMvn].into_iter().enumerate() {
            let tag = match generator {
                Generator::Matnormal => "matnormal",
                Generator::StrictMvn => "strict",
            };
            out.push(Scenario {
                name: format!("{tag}_c{c}_r{c}_n1000"),
                generator,
                n_samples: 1000,
                n_rows: c,
                n_cols: c,
                seed: seed.wrapping_add((2 * i + j) as u64),
                diagnostics: all_diagnostics(),
            });
        }
    }
    out
}

/// Scenario file: a TOML document with one `[[scenario]]` table per scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(rename = "scenario", default)]
    pub scenarios: Vec<Scenario>,
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }
}
