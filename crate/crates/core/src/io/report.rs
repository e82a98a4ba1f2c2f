//! JSON reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{AlignmentStats, LrtResult, PlotKind};
use crate::error::Error;
use crate::estimation::FlipFlopReport;
use crate::params::MvnParams;
use crate::simharness::{Notice, Scenario, ScenarioFailure, ScenarioResult};

pub fn to_json_pretty<S: Serialize + ?Sized>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Single-line `{"error": {"kind": ..., "message": ...}}` object.
pub fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

pub fn error_json_of(err: &Error) -> String {
    error_json(err.kind(), &err.to_string())
}

/// Output of the `fit` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n_samples: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub flipflop: FlipFlopReport<f64>,
    /// Unstructured fit, present only when `N > c r`.
    pub mvn: Option<MvnParams<f64>>,
    pub mvn_notice: Option<String>,
}

/// Per-scenario entry of a suite summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    pub alignment: BTreeMap<PlotKind, AlignmentStats<f64>>,
    pub lrt: Option<LrtResult<f64>>,
    pub notices: Vec<Notice>,
    pub flipflop_iterations: usize,
    pub flipflop_converged: bool,
}

impl From<&ScenarioResult> for ScenarioSummary {
    fn from(r: &ScenarioResult) -> Self {
        Self {
            scenario: r.scenario.clone(),
            alignment: r.alignment.clone(),
            lrt: r.lrt,
            notices: r.notices.clone(),
            flipflop_iterations: r.fit_report.iterations_used,
            flipflop_converged: r.fit_report.converged,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub results: Vec<ScenarioSummary>,
    pub failures: Vec<ScenarioFailure>,
}
