use std::fs;
use std::path::Path;

use rayon::prelude::*;
use softbte_core::config::RunConfig;
use softbte_core::dynamics::{decay_fit_window, simulate, TimeSeriesRecord};
use softbte_core::report::{self, SimulationSummary, SweepRow, SweepStatus, VerifyReport};
use softbte_core::verify::run_suite;
use softbte_core::weights::{decay_exponent, WeightParams};
use softbte_core::{Error, ModelParams};

use crate::plot;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Config = 1,
    Unstable = 2,
    CertificateFailure = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            status: Status::Config,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NegativeDensity { .. } => Status::Unstable,
            _ => Status::Config,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

pub type Outcome = Result<Status, Failure>;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn prepare(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))
}

fn timestamp(cfg: &RunConfig) -> Option<String> {
    cfg.output
        .timestamp
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

/// Writes timeseries.csv, summary.json and three SVG plots.
pub fn simulate_cmd(cfg: &RunConfig) -> Outcome {
    let record = simulate(&cfg.simulation())?;
    write_run(cfg, &record)
}

// Artifacts of a finished or aborted run; status 2 for an aborted one.
fn write_run(cfg: &RunConfig, record: &TimeSeriesRecord) -> Outcome {
    let dir = &cfg.output.dir;
    prepare(dir)?;
    let stamp = timestamp(cfg);
    let summary = SimulationSummary::new(cfg, record, stamp.clone())?;
    write(dir, "timeseries.csv", &report::time_series_csv(record)?)?;
    write(dir, "summary.json", &report::to_json(&summary))?;
    let s = stamp.as_deref();
    let plots = [
        ("norm.svg", plot::norm_plot(record, s)),
        ("entropy.svg", plot::entropy_plot(record, s)),
        ("fit.svg", plot::fit_plot(record, summary.fit.as_ref(), s)),
    ];
    for (name, svg) in plots {
        let svg = svg.map_err(|e| Failure::config(format!("plot {name}: {e}")))?;
        write(dir, name, &svg)?;
    }
    if record.unstable {
        return Err(Failure {
            status: Status::Unstable,
            message: format!("run aborted as unstable at t = {}", record.rows.last().map_or(0.0, |r| r.t)),
        });
    }
    Ok(Status::Ok)
}

/// Writes verify.json; status 3 unless every certificate passes.
pub fn verify_cmd(cfg: &RunConfig, suite: &str) -> Outcome {
    let certs = run_suite(suite, &cfg.simulation(), &cfg.verify)?;
    let dir = &cfg.output.dir;
    prepare(dir)?;
    let report = VerifyReport::new(cfg, suite, certs, timestamp(cfg));
    write(dir, "verify.json", &report::to_json(&report))?;
    for c in &report.certificates {
        println!("{:<8} {}", format!("{:?}", c.verdict).to_lowercase(), c.lemma_id);
    }
    if report.passed {
        Ok(Status::Ok)
    } else {
        Err(Failure {
            status: Status::CertificateFailure,
            message: "one or more certificates did not pass".into(),
        })
    }
}

fn sweep_point(cfg: &RunConfig, gamma: f64, vartheta: f64) -> SweepRow {
    let mut row = SweepRow {
        gamma,
        vartheta,
        rho_theory: f64::NAN,
        rho_est: f64::NAN,
        lambda: f64::NAN,
        r_squared: f64::NAN,
        status: SweepStatus::Skipped,
        reason: String::new(),
    };
    let model = ModelParams { gamma, ..cfg.model };
    let weights = WeightParams { vartheta, ..cfg.weights };
    if let Err(e) = model.validate().and_then(|_| weights.validate(gamma)) {
        row.reason = e.to_string();
        return row;
    }
    row.rho_theory = decay_exponent(gamma, vartheta).unwrap_or(f64::NAN);
    let mut sim = cfg.simulation();
    sim.model = model;
    sim.weights = weights;
    let record = match simulate(&sim) {
        Ok(r) => r,
        Err(e) => {
            if matches!(e, Error::NegativeDensity { .. }) {
                row.status = SweepStatus::Unstable;
            }
            row.reason = e.to_string();
            return row;
        }
    };
    if record.unstable {
        row.status = SweepStatus::Unstable;
        row.reason = "sup |h| exceeded the instability threshold".into();
        return row;
    }
    match decay_fit_window(&record, row.rho_theory, cfg.fit.window) {
        Ok(fit) => {
            row.rho_est = fit.rho_est;
            row.lambda = fit.lambda;
            row.r_squared = fit.fit_quality;
            row.status = SweepStatus::Ok;
        }
        Err(e) => {
            row.status = SweepStatus::FitDegenerate;
            row.reason = e.to_string();
        }
    }
    row
}

/// Writes sweep.csv with one row per (γ, ϑ); rows run in parallel.
pub fn sweep_cmd(cfg: &RunConfig) -> Outcome {
    let pairs: Vec<(f64, f64)> = cfg
        .sweep
        .gammas
        .iter()
        .flat_map(|&g| cfg.sweep.varthetas.iter().map(move |&t| (g, t)))
        .collect();
    let rows: Vec<SweepRow> = pairs.par_iter().map(|&(g, t)| sweep_point(cfg, g, t)).collect();
    let dir = &cfg.output.dir;
    prepare(dir)?;
    write(dir, "sweep.csv", &report::sweep_csv(&rows)?)?;
    for r in &rows {
        println!("gamma={} vartheta={} {}", r.gamma, r.vartheta, r.status.as_str());
    }
    if rows.iter().any(|r| r.status == SweepStatus::Unstable) {
        return Err(Failure {
            status: Status::Unstable,
            message: "one or more sweep points were unstable".into(),
        });
    }
    Ok(Status::Ok)
}
