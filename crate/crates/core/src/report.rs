//! Structured verdicts of inequality checks and their serialization.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::operators::{default_estimator, GradedMatrix, NormEstimate, NormEstimator, DEFAULT_TOL};
use crate::words::DEFAULT_BALL_CAP;

/// The verdict of one check: `pass` iff `lhs <= rhs + tol` and every extra
/// condition recorded with [`BoundReport::require`] holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub seed: Option<u64>,
    pub trial: Option<usize>,
}

impl BoundReport {
    pub fn new(check: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        BoundReport {
            check: check.to_string(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs + tol,
            seed: None,
            trial: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Records an additional condition; a false one fails the report.
    pub fn require(mut self, key: &str, holds: bool) -> Self {
        self.pass &= holds;
        self.param(key, holds)
    }

    pub fn with_trial(mut self, seed: u64, trial: usize) -> Self {
        self.seed = Some(seed);
        self.trial = Some(trial);
        self
    }
}

/// Shared settings for every check: the norm strategy, the pass tolerance
/// and the ball-size cap.
#[derive(Clone, Debug)]
pub struct CheckContext {
    pub estimator: Arc<dyn NormEstimator>,
    pub tol: f64,
    pub ball_cap: usize,
}

impl Default for CheckContext {
    fn default() -> Self {
        CheckContext {
            estimator: default_estimator(),
            tol: DEFAULT_TOL,
            ball_cap: DEFAULT_BALL_CAP,
        }
    }
}

impl CheckContext {
    pub fn with_estimator(estimator: Arc<dyn NormEstimator>) -> Self {
        CheckContext {
            estimator,
            ..Self::default()
        }
    }

    pub fn norm(&self, a: &GradedMatrix) -> NormEstimate {
        let est = self.estimator.estimate(a);
        if !est.converged {
            log::warn!(
                "{} estimate did not converge after {} iterations (residual {:.2e})",
                self.estimator.name(),
                est.iterations,
                est.residual
            );
        }
        est
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::usage(format!("unknown format {s:?}; expected json or csv"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    seed: Option<u64>,
    trial: Option<usize>,
    lhs: f64,
    rhs: f64,
    slack: f64,
    pass: bool,
}

fn write_error(source: std::io::Error) -> Error {
    Error::Io {
        path: "<report output>".into(),
        source,
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes a timestamp header line followed by the reports. The header is
/// the only line that differs between identical runs.
pub fn write_reports<W: Write>(out: W, reports: &[BoundReport], format: ReportFormat) -> Result<()> {
    write_reports_at(out, reports, format, timestamp())
}

pub fn write_reports_at<W: Write>(
    mut out: W,
    reports: &[BoundReport],
    format: ReportFormat,
    generated_at: u64,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            writeln!(out, "{}", serde_json::json!({ "generated_at": generated_at }))
                .map_err(write_error)?;
            for r in reports {
                let line = serde_json::to_string(r).map_err(|source| Error::Json {
                    context: "report".into(),
                    source,
                })?;
                writeln!(out, "{line}").map_err(write_error)?;
            }
            out.flush().map_err(write_error)
        }
        ReportFormat::Csv => {
            writeln!(out, "# generated_at={generated_at}").map_err(write_error)?;
            let mut w = csv::Writer::from_writer(out);
            for r in reports {
                w.serialize(CsvRow {
                    check: &r.check,
                    seed: r.seed,
                    trial: r.trial,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    slack: r.slack,
                    pass: r.pass,
                })
                .map_err(|e| write_error(std::io::Error::other(e)))?;
            }
            if reports.is_empty() {
                w.write_record(["check", "seed", "trial", "lhs", "rhs", "slack", "pass"])
                    .map_err(|e| write_error(std::io::Error::other(e)))?;
            }
            w.flush().map_err(write_error)
        }
    }
}
