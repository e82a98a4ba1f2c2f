//! The `matnorm-diag` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::plot::{write_plot_csv, write_plot_svg, SvgPlot};
use super::report::{error_json, error_json_of, to_json_pretty, FitReport, ScenarioSummary, SuiteSummary};
use super::stack::{read_matrix_stack, write_matrix_stack};
use super::format_float;
use crate::dataset::MatrixDataset;
use crate::diagnostics::{dd_series, healy_type_series, mhealy_series, separability_lrt_with, PlotSeries};
use crate::error::{Error, Result};
use crate::estimation::{flipflop_mle, mvn_mle, FlipFlopConfig};
use crate::propcheck::{run_rate_experiment, CellStat, RateGrid};
use crate::simharness::{default_suite, generate_data, run_suite, Generator, Scenario, SuiteConfig};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "MATNORM_DIAG_THREADS";

const EXIT_OK: i32 = 0;
const EXIT_ERROR: i32 = 1;
const EXIT_INFEASIBLE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "matnorm-diag", version, about = "Matrix-variate normality diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a dataset and write it as a matrix stack.
    Simulate(SimulateArgs),
    /// Fit the matrix normal model (and the unstructured normal when N > c r).
    Fit(FitArgs),
    /// MHealy plot.
    Mhealy(PlotArgs),
    /// DD plot (requires N > c r).
    Ddplot(PlotArgs),
    /// Healy-type plot (requires N > c r).
    Healy(PlotArgs),
    /// Separability likelihood-ratio test (requires N > c r).
    Lrt(LrtArgs),
    /// Monte Carlo check of the distance error rates.
    Propcheck(PropcheckArgs),
    /// Run a scenario suite.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dist {
    Matnorm,
    Mvn,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    dist: Dist,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FlipFlopArgs {
    /// Relative Frobenius change below which the flip-flop stops.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

impl FlipFlopArgs {
    fn config(&self) -> Result<FlipFlopConfig> {
        let config = FlipFlopConfig {
            tolerance: self.tol,
            max_iterations: self.max_iter,
            ..FlipFlopConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    flipflop: FlipFlopArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_prefix: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,svg")]
    format: Vec<Format>,
    #[command(flatten)]
    flipflop: FlipFlopArgs,
}

#[derive(Args, Debug)]
struct LrtArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    flipflop: FlipFlopArgs,
}

#[derive(Args, Debug)]
struct PropcheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    c_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "250,1000,4000")]
    n_values: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Held-out samples per replication on which distances are compared.
    #[arg(long, default_value_t = 100)]
    probes: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Scenario file; the default suite is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker count; 0 uses the global pool.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Base seed of the default suite.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Drops default-suite regimes with c above this.
    #[arg(long)]
    max_dim: Option<usize>,
}

/// Failure of a subcommand.
enum Failure {
    /// The requested diagnostic does not apply at this sample size.
    Infeasible(String),
    Error(Error),
    /// Already reported; only the exit code remains.
    Reported(i32),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 on success, 2 when a diagnostic is infeasible because `N <= c r`, and 1
/// on any other error.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let _ = e.print();
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            eprintln!("{}", error_json("usage", first));
            return EXIT_ERROR;
        }
    };
    if let Err(e) = configure_threads() {
        report_error(&e);
        return EXIT_ERROR;
    }
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Mhealy(a) => plot(a, PlotCmd::Mhealy),
        Command::Ddplot(a) => plot(a, PlotCmd::Dd),
        Command::Healy(a) => plot(a, PlotCmd::Healy),
        Command::Lrt(a) => lrt(a),
        Command::Propcheck(a) => propcheck(a),
        Command::Suite(a) => suite(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Infeasible(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{}", error_json("infeasible", &msg));
            EXIT_INFEASIBLE
        }
        Err(Failure::Error(e)) => {
            report_error(&e);
            EXIT_ERROR
        }
        Err(Failure::Reported(code)) => code,
    }
}

fn report_error(e: &Error) {
    eprintln!("error: {e}");
    eprintln!("{}", error_json_of(e));
}

fn configure_threads() -> Result<()> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let raw = raw.to_string_lossy();
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer, found {raw:?}")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn load(path: &Path) -> Result<MatrixDataset<f64>> {
    read_matrix_stack(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn require_feasible(what: &str, data: &MatrixDataset<f64>) -> CmdResult {
    if data.n_samples() > data.dim() {
        return Ok(());
    }
    Err(Failure::Infeasible(format!(
        "{what} requires N > c r, but N = {} and c r = {} x {} = {}",
        data.n_samples(),
        data.n_rows(),
        data.n_cols(),
        data.dim()
    )))
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let scenario = Scenario {
        name: "simulate".into(),
        generator: match a.dist {
            Dist::Matnorm => Generator::Matnormal,
            Dist::Mvn => Generator::StrictMvn,
        },
        n_samples: a.samples,
        n_rows: a.rows,
        n_cols: a.cols,
        seed: a.seed,
        diagnostics: vec![],
    };
    scenario.validate()?;
    let data = generate_data(&scenario)?;
    write_matrix_stack(&data, &a.out)?;
    Ok(())
}

fn fit(a: FitArgs) -> CmdResult {
    let config = a.flipflop.config()?;
    let data = load(&a.input)?;
    let flipflop = flipflop_mle(&data, &config)?;
    let (mvn, mvn_notice) = if data.n_samples() > data.dim() {
        match mvn_mle(&data.vectorized()) {
            Ok(p) => (Some(p), None),
            Err(e @ Error::CovarianceSingular(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    } else {
        (
            None,
            Some(format!(
                "unstructured fit skipped: requires N > c r, but N = {} and c r = {}",
                data.n_samples(),
                data.dim()
            )),
        )
    };
    let report = FitReport {
        n_samples: data.n_samples(),
        n_rows: data.n_rows(),
        n_cols: data.n_cols(),
        flipflop,
        mvn,
        mvn_notice,
    };
    write_text(&a.out, &to_json_pretty(&report))?;
    Ok(())
}

#[derive(Clone, Copy)]
enum PlotCmd {
    Mhealy,
    Dd,
    Healy,
}

fn plot(a: PlotArgs, cmd: PlotCmd) -> CmdResult {
    let config = a.flipflop.config()?;
    let data = load(&a.input)?;
    let (name, suffix) = match cmd {
        PlotCmd::Mhealy => ("mhealy", "mhealy"),
        PlotCmd::Dd => ("ddplot", "dd"),
        PlotCmd::Healy => ("healy", "healy"),
    };
    if !matches!(cmd, PlotCmd::Mhealy) {
        require_feasible(name, &data)?;
    }
    let series = match cmd {
        PlotCmd::Mhealy => mhealy_series(&data, &flipflop_mle(&data, &config)?.params)?,
        PlotCmd::Dd => {
            let fit = flipflop_mle(&data, &config)?;
            dd_series(&data, &fit.params, &mvn_mle(&data.vectorized())?)?
        }
        PlotCmd::Healy => healy_type_series(&data, &mvn_mle(&data.vectorized())?)?,
    };
    emit_series(&series, &a.out_prefix, suffix, &a.format)?;
    Ok(())
}

fn emit_series(series: &PlotSeries<f64>, prefix: &Path, suffix: &str, formats: &[Format]) -> Result<()> {
    if formats.contains(&Format::Csv) {
        let path = with_suffix(prefix, &format!(".{suffix}.csv"));
        write_plot_csv(series, &path)?;
    }
    if formats.contains(&Format::Svg) {
        let path = with_suffix(prefix, &format!(".{suffix}.svg"));
        write_plot_svg(series, &SvgPlot::default(), &path)?;
    }
    Ok(())
}

fn lrt(a: LrtArgs) -> CmdResult {
    let config = a.flipflop.config()?;
    let data = load(&a.input)?;
    require_feasible("lrt", &data)?;
    let res = separability_lrt_with(&data, &config)?;
    print!("{}", to_json_pretty(&res));
    Ok(())
}

fn cells_csv(report: &crate::propcheck::RateReport) -> String {
    let mut out = String::from("c,n");
    for q in ["matrix_msd_error", "vector_msd_error", "mean_error", "col_cov_error", "row_cov_error", "vector_cov_error"] {
        let _ = write!(out, ",{q}_mean,{q}_se");
    }
    out.push_str(",redraws\n");
    for cell in &report.cells {
        let _ = write!(out, "{},{}", cell.c, cell.n);
        let stats: [&CellStat; 6] = [
            &cell.matrix_msd_error,
            &cell.vector_msd_error,
            &cell.mean_error,
            &cell.col_cov_error,
            &cell.row_cov_error,
            &cell.vector_cov_error,
        ];
        for s in stats {
            let _ = write!(out, ",{},{}", format_float(s.mean), format_float(s.se));
        }
        let _ = writeln!(out, ",{}", cell.redraws);
    }
    out
}

fn propcheck(a: PropcheckArgs) -> CmdResult {
    let grid = RateGrid {
        c_values: a.c_values,
        n_values: a.n_values,
        replications: a.reps,
        probe_samples: a.probes,
    };
    let report = run_rate_experiment(&grid, a.seed)?;
    write_text(&with_suffix(&a.out_prefix, ".cells.csv"), &cells_csv(&report))?;
    write_text(&with_suffix(&a.out_prefix, ".summary.json"), &to_json_pretty(&report))?;
    Ok(())
}

fn suite(a: SuiteArgs) -> CmdResult {
    let scenarios = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
            })?;
            SuiteConfig::parse(&text)?.scenarios
        }
        None => default_suite(a.seed, a.max_dim),
    };
    if scenarios.is_empty() {
        return Err(Error::InvalidInput("the suite has no scenarios".into()).into());
    }
    for s in &scenarios {
        s.validate()?;
    }
    let results = run_suite(&scenarios, a.parallelism)?;
    std::fs::create_dir_all(&a.out_dir).map_err(Error::from)?;
    let mut summary = SuiteSummary {
        results: Vec::new(),
        failures: Vec::new(),
    };
    for res in results {
        match res {
            Ok(r) => {
                let dir = a.out_dir.join(&r.scenario.name);
                std::fs::create_dir_all(&dir).map_err(Error::from)?;
                for (kind, series) in &r.plot_series {
                    let base = dir.join(kind.as_str());
                    write_plot_csv(series, with_suffix(&base, ".csv"))?;
                    write_plot_svg(series, &SvgPlot::default(), with_suffix(&base, ".svg"))?;
                }
                let entry = ScenarioSummary::from(&r);
                write_text(&dir.join("result.json"), &to_json_pretty(&entry))?;
                summary.results.push(entry);
            }
            Err(f) => {
                eprintln!("error: {f}");
                eprintln!("{}", error_json(&f.kind, &f.to_string()));
                summary.failures.push(f);
            }
        }
    }
    write_text(&a.out_dir.join("summary.json"), &to_json_pretty(&summary))?;
    if summary.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Reported(EXIT_ERROR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_appends_to_the_file_name() {
        assert_eq!(with_suffix(Path::new("out/run"), ".dd.csv"), PathBuf::from("out/run.dd.csv"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["matnorm-diag", "frobnicate"]), EXIT_ERROR);
        assert_eq!(cli_main(["matnorm-diag", "--help"]), EXIT_OK);
    }
}
