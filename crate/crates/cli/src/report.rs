//! Suite reports, their merge, and plot-data emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mellin_core::io::write_atomic;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `value <= threshold`
    AtMost,
    /// `value > threshold`
    Above,
    /// `value >= threshold`
    AtLeast,
    /// `value < threshold`
    Below,
}

impl Relation {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Self::AtMost => value <= threshold,
            Self::Above => value > threshold,
            Self::AtLeast => value >= threshold,
            Self::Below => value < threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// `None` when the check raised an error.
    pub value: Option<f64>,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
    pub note: String,
}

/// Columns of numbers for one plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotSeries {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Result of one suite. Wall times go to a separate file so that the report
/// itself is byte-identical across runs with the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub fixtures: Vec<String>,
    pub grid_hash: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub plots: Vec<PlotSeries>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub suite: String,
    pub seconds: BTreeMap<String, f64>,
}

/// Reports keyed by suite name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: bool,
    pub suites: BTreeMap<String, SuiteReport>,
}

impl Summary {
    /// Later reports for the same suite replace earlier ones, so merging a
    /// summary into itself changes nothing.
    pub fn absorb(&mut self, report: SuiteReport) {
        self.suites.insert(report.suite.clone(), report);
        self.pass = self.suites.values().all(|r| r.pass);
    }

    pub fn merge(&mut self, other: Summary) {
        for r in other.suites.into_values() {
            self.absorb(r);
        }
    }
}

/// A file on disk is either a single suite report or a merged summary.
#[derive(Deserialize)]
#[serde(untagged)]
enum ReportFile {
    Summary(Summary),
    Suite(SuiteReport),
}

pub fn load_summary(paths: &[PathBuf]) -> Result<Summary, CliError> {
    let mut summary = Summary {
        pass: true,
        ..Summary::default()
    };
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let file: ReportFile =
            serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: not a report: {e}", path.display())))?;
        match file {
            ReportFile::Summary(s) => summary.merge(s),
            ReportFile::Suite(r) => summary.absorb(r),
        }
    }
    Ok(summary)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn plot_csv(series: &PlotSeries) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&series.columns).map_err(io)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Writes every plot series as `<dir>/<suite>/<name>.csv` and returns the
/// paths written.
pub fn emit_plots(summary: &Summary, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (suite, report) in &summary.suites {
        for series in &report.plots {
            let path = dir.join(suite).join(format!("{}.csv", series.name));
            write_atomic(&path, &plot_csv(series)?).map_err(|e| CliError::Io(e.to_string()))?;
            written.push(path);
        }
    }
    Ok(written)
}
