//! Deterministic CSV and JSON artifacts. Timestamps are supplied by the
//! caller, so identical inputs give byte-identical output.

use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{decay_fit_window, DecayFit, Row, TimeSeriesRecord, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::verify::{Certificate, Verdict};
use crate::weights::decay_exponent;

pub const TOOL: &str = "softbte";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Float format of every CSV cell.
pub fn format_cell(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Time series with the fixed columns t, h_sup, …, leakage.
pub fn time_series_csv(record: &TimeSeriesRecord) -> Result<String> {
    csv_string(
        &CSV_COLUMNS,
        record.rows.iter().map(|r| r.csv_values().iter().map(|&x| format_cell(x)).collect()),
    )
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub config: &'a RunConfig,
    pub rows: usize,
    pub steps: usize,
    pub unstable: bool,
    pub clipped_fraction: f64,
    pub limited_projections: usize,
    pub transport_clipped: f64,
    /// Largest relative drift of (mass, momentum, energy) from t = 0.
    pub max_moment_drift: f64,
    pub final_row: Option<Row>,
    pub rho_theory: f64,
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

impl<'a> SimulationSummary<'a> {
    pub fn new(config: &'a RunConfig, record: &TimeSeriesRecord, timestamp: Option<String>) -> Result<Self> {
        let rho_theory = decay_exponent(config.model.gamma, config.weights.vartheta)?;
        let (fit, fit_error) = match decay_fit_window(record, rho_theory, config.fit.window) {
            Ok(f) => (Some(f), None),
            Err(Error::FitDegenerate(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };
        let max_moment_drift = record.rows.first().map_or(0.0, |first| {
            record
                .rows
                .iter()
                .map(|r| r.moments.relative_drift(&first.moments))
                .fold(0.0, f64::max)
        });
        Ok(Self {
            tool: TOOL,
            version: VERSION,
            timestamp,
            config,
            rows: record.len(),
            steps: record.completed_steps(),
            unstable: record.unstable,
            clipped_fraction: record.clipped_fraction,
            limited_projections: record.limited_projections,
            transport_clipped: record.transport_clipped,
            max_moment_drift,
            final_row: record.rows.last().copied(),
            rho_theory,
            fit,
            fit_error,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub suite: String,
    /// All verdicts are pass.
    pub passed: bool,
    pub config: &'a RunConfig,
    pub certificates: Vec<Certificate>,
}

impl<'a> VerifyReport<'a> {
    pub fn new(config: &'a RunConfig, suite: &str, certificates: Vec<Certificate>, timestamp: Option<String>) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            timestamp,
            suite: suite.to_string(),
            passed: certificates.iter().all(|c| c.verdict == Verdict::Pass),
            config,
            certificates,
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 8] = ["gamma", "vartheta", "rho_theory", "rho_est", "lambda", "r_squared", "status", "reason"];

/// One (γ, ϑ) point of a sweep. Measured fields are NaN unless status is "ok".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub vartheta: f64,
    pub rho_theory: f64,
    pub rho_est: f64,
    pub lambda: f64,
    pub r_squared: f64,
    pub status: SweepStatus,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatus {
    Ok,
    Skipped,
    Unstable,
    FitDegenerate,
}

impl SweepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::Skipped => "skipped",
            SweepStatus::Unstable => "unstable",
            SweepStatus::FitDegenerate => "fit-degenerate",
        }
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_string(
        &SWEEP_COLUMNS,
        rows.iter().map(|r| {
            let mut cells: Vec<String> = [r.gamma, r.vartheta, r.rho_theory, r.rho_est, r.lambda, r.r_squared]
                .iter()
                .map(|&x| format_cell(x))
                .collect();
            cells.push(r.status.as_str().to_string());
            cells.push(r.reason.clone());
            cells
        }),
    )
}
