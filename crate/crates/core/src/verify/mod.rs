//! Numerical certificates for the kernel, weight, nonlinear and entropy
//! bounds. Inequalities with unspecified constants are checked by fitting
//! the smallest constant on a training sample and demanding zero hold-out
//! violations at that constant times a slack factor.

mod bounds;
mod runs;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use bounds::{
    certify_gamma_bounds, certify_k1, certify_k2, certify_kchi_weighted, certify_klowcut_scaling,
    certify_nu_bounds, certify_nutilde, k2_bound_esti0, k2_bound_esti1, GammaSample, NuSweep,
};
pub use runs::{
    adversarial_fixture, certify_decay, certify_entropy, certify_picard, entropy_tolerance,
    PicardCalibration, ENTROPY_FLOOR, ENTROPY_REL_TOL,
};

use crate::dynamics::{InitialData, SimulationConfig};
use crate::error::{Error, Result};
use crate::kernel::{GridSpec, ModelParams, VelocityGrid};

pub const DEFAULT_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

/// Outcome of one bound check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lemma_id: String,
    pub claim: String,
    pub fitted_constants: BTreeMap<String, f64>,
    pub train_size: usize,
    pub holdout_size: usize,
    /// Fraction of hold-out checks that passed.
    pub pass_fraction: f64,
    /// Largest hold-out excess over the allowed value, relative to it;
    /// ≤ 0 when every check passed.
    pub worst_violation: f64,
    pub verdict: Verdict,
    pub flags: Vec<String>,
    /// Informational quantities that do not affect the verdict.
    pub info: BTreeMap<String, f64>,
}

impl Certificate {
    pub fn new(lemma_id: &str, claim: &str) -> Self {
        Self {
            lemma_id: lemma_id.to_string(),
            claim: claim.to_string(),
            fitted_constants: BTreeMap::new(),
            train_size: 0,
            holdout_size: 0,
            pass_fraction: 0.0,
            worst_violation: 0.0,
            verdict: Verdict::Degenerate,
            flags: Vec::new(),
            info: BTreeMap::new(),
        }
    }

    pub fn degenerate(lemma_id: &str, claim: &str, reason: &str) -> Self {
        let mut c = Self::new(lemma_id, claim);
        c.flags.push(format!("degenerate: {reason}"));
        c
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.fitted_constants.insert(name.to_string(), value);
        self
    }

    pub fn with_info(mut self, name: &str, value: f64) -> Self {
        self.info.insert(name.to_string(), value);
        self
    }

    /// Folds a hold-out tally into the certificate and sets the verdict.
    pub fn finish(mut self, tally: Tally) -> Self {
        self.holdout_size = tally.total;
        if tally.total == 0 {
            self.verdict = Verdict::Degenerate;
            self.pass_fraction = 0.0;
            return self;
        }
        self.pass_fraction = (tally.total - tally.violations) as f64 / tally.total as f64;
        self.worst_violation = tally.worst;
        self.verdict = if tally.violations == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }
}

/// Count of hold-out checks and violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tally {
    pub total: usize,
    pub violations: usize,
    pub worst: f64,
}

impl Default for Tally {
    fn default() -> Self {
        Self {
            total: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
        }
    }
}

impl Tally {
    /// Records a check of `value ≤ allowed`.
    pub fn upper(&mut self, value: f64, allowed: f64) {
        self.total += 1;
        let excess = if allowed > 0.0 {
            value / allowed - 1.0
        } else if value <= allowed {
            -1.0
        } else {
            f64::INFINITY
        };
        let excess = if excess.is_nan() { f64::INFINITY } else { excess };
        if excess > 0.0 {
            self.violations += 1;
        }
        self.worst = self.worst.max(excess);
    }

    /// Records a check of `value ≥ allowed` for positive `allowed`.
    pub fn lower(&mut self, value: f64, allowed: f64) {
        self.total += 1;
        let excess = if value > 0.0 { allowed / value - 1.0 } else { f64::INFINITY };
        if excess > 0.0 {
            self.violations += 1;
        }
        self.worst = self.worst.max(excess);
    }

    pub fn merge(&mut self, other: &Tally) {
        self.total += other.total;
        self.violations += other.violations;
        self.worst = self.worst.max(other.worst);
    }
}

/// Smallest C with every finite train ratio ≤ C; `None` when no ratio is
/// positive and finite.
pub fn fit_upper(train: &[f64]) -> Option<f64> {
    let c = train
        .iter()
        .copied()
        .filter(|r| r.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    (c > 0.0 && c.is_finite()).then_some(c)
}

/// Largest c with every finite train ratio ≥ c; `None` unless positive.
pub fn fit_lower(train: &[f64]) -> Option<f64> {
    let c = train
        .iter()
        .copied()
        .filter(|r| r.is_finite())
        .fold(f64::INFINITY, f64::min);
    (c > 0.0 && c.is_finite()).then_some(c)
}

/// Settings of the certificate suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySettings {
    /// Grid for the operator-level certificates.
    pub grid: GridSpec,
    /// Smaller grid for the Picard contraction ladder.
    pub picard_grid: GridSpec,
    /// Grid for the Γ± bounds, whose gain sums dominate the suite cost.
    pub gamma_grid: GridSpec,
    pub slack: f64,
    pub train: usize,
    pub holdout: usize,
    pub nu_gammas: Vec<f64>,
    pub nu_sweep: NuSweep,
    pub eps_grid: Vec<f64>,
    pub klowcut_gammas: Vec<f64>,
    /// Hölder exponent for the Γ bounds.
    pub p: f64,
    pub picard_train: usize,
    pub picard_holdout: usize,
    pub entropy_runs: usize,
    pub entropy_t_end: f64,
    pub entropy_amplitude: f64,
    /// Replace the entropy records by the negative-control fixture.
    pub adversarial: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            grid: GridSpec { radius: 8.0, n: 16 },
            picard_grid: GridSpec { radius: 5.0, n: 8 },
            gamma_grid: GridSpec { radius: 6.0, n: 12 },
            slack: DEFAULT_SLACK,
            train: 50,
            holdout: 50,
            nu_gammas: vec![-0.5, -1.0, -2.0, -2.5],
            nu_sweep: NuSweep::default(),
            eps_grid: vec![0.4, 0.2, 0.1, 0.05],
            klowcut_gammas: vec![-1.0, -2.0],
            p: 2.5,
            picard_train: 5,
            picard_holdout: 10,
            entropy_runs: 5,
            entropy_t_end: 2.0,
            entropy_amplitude: 0.5,
            adversarial: false,
        }
    }
}

impl VerifySettings {
    pub fn validate(&self) -> Result<()> {
        VelocityGrid::new(self.grid.radius, self.grid.n)?;
        VelocityGrid::new(self.picard_grid.radius, self.picard_grid.n)?;
        VelocityGrid::new(self.gamma_grid.radius, self.gamma_grid.n)?;
        if !(self.slack >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "verify.slack",
                value: self.slack,
                condition: "slack ≥ 1",
            });
        }
        if !(self.entropy_amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "verify.entropy_amplitude",
                value: self.entropy_amplitude,
                condition: "amplitude ≥ 0",
            });
        }
        Ok(())
    }
}

/// Names accepted by `run_suite`.
pub const SUITES: [&str; 11] = [
    "nu", "k1", "k2", "kchi", "klowcut", "gamma", "nutilde", "entropy", "decay", "picard", "all",
];

/// Runs one named suite (or all of them) and returns its certificates.
pub fn run_suite(
    suite: &str,
    sim: &SimulationConfig,
    settings: &VerifySettings,
) -> Result<Vec<Certificate>> {
    if !SUITES.contains(&suite) {
        return Err(Error::Config(format!(
            "unknown suite \"{suite}\"; valid suites: {}",
            SUITES.join(", ")
        )));
    }
    sim.validate()?;
    settings.validate()?;
    let names: Vec<&str> = if suite == "all" {
        SUITES[..SUITES.len() - 1].to_vec()
    } else {
        vec![suite]
    };
    let mut out = Vec::new();
    for name in names {
        out.extend(run_one(name, sim, settings)?);
    }
    Ok(out)
}

fn grid_of(spec: &GridSpec) -> Result<VelocityGrid> {
    VelocityGrid::new(spec.radius, spec.n)
}

fn run_one(name: &str, sim: &SimulationConfig, s: &VerifySettings) -> Result<Vec<Certificate>> {
    let model = sim.model;
    let wp = sim.weights;
    let seed = sim.seed;
    Ok(match name {
        "nu" => vec![certify_nu_bounds(&s.nu_gammas, &s.nu_sweep)?],
        "k1" => vec![certify_k1(&model, 100 * s.train.max(1), 100 * s.holdout.max(1), s.slack, seed)?],
        "k2" => {
            let grid = grid_of(&s.grid)?;
            vec![certify_k2(&grid, &model, 6, 6, s.slack, seed)?]
        }
        "kchi" => {
            let grid = grid_of(&s.grid)?;
            vec![certify_kchi_weighted(&grid, &model, &wp, 5, 5, s.slack, seed)?]
        }
        "klowcut" => {
            let grid = grid_of(&s.grid)?;
            s.klowcut_gammas
                .iter()
                .map(|&g| {
                    let m = ModelParams { gamma: g, ..model };
                    let wpg = crate::weights::WeightParams {
                        vartheta: 0.0,
                        ..wp
                    };
                    certify_klowcut_scaling(&grid, &m, &wpg, &s.eps_grid, None)
                })
                .collect::<Result<_>>()?
        }
        "gamma" => {
            let grid = grid_of(&s.gamma_grid)?;
            vec![certify_gamma_bounds(&grid, &model, &wp, s.p, s.train, s.holdout, s.slack, seed)?]
        }
        "nutilde" => vec![certify_nutilde(&model, &wp, s.train * 2, s.holdout * 2, s.slack, seed)?],
        "entropy" => {
            let mut records = Vec::with_capacity(s.entropy_runs);
            for k in 0..s.entropy_runs {
                let cfg = SimulationConfig {
                    t_end: s.entropy_t_end,
                    init: match sim.init {
                        InitialData::Bump { mode, .. } => InitialData::Bump {
                            amplitude: s.entropy_amplitude,
                            mode,
                        },
                        other => other,
                    },
                    seed: seed.wrapping_add(k as u64),
                    ..sim.clone()
                };
                let rec = crate::dynamics::simulate(&cfg)?;
                records.push(if s.adversarial { adversarial_fixture(&rec) } else { rec });
            }
            vec![certify_entropy(&records)]
        }
        "decay" => {
            let rec = crate::dynamics::simulate(sim)?;
            vec![certify_decay(&rec, model.gamma, wp.vartheta)?]
        }
        "picard" => {
            let grid = grid_of(&s.picard_grid)?;
            vec![certify_picard(&grid, &model, sim.sphere_rule, s.picard_train, s.picard_holdout, seed)?.0]
        }
        _ => unreachable!("suite names are checked by run_suite"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_and_fit_helpers() {
        assert_eq!(fit_upper(&[0.5, 2.0, f64::NAN, 1.0]), Some(2.0));
        assert_eq!(fit_upper(&[0.0, -1.0]), None);
        assert_eq!(fit_lower(&[0.5, 2.0, 1.0]), Some(0.5));
        let mut t = Tally::default();
        t.upper(1.0, 2.0);
        t.upper(2.2, 2.0);
        t.lower(1.0, 0.5);
        assert_eq!((t.total, t.violations), (3, 1));
        assert!((t.worst - 0.1).abs() < 1e-12);
        let c = Certificate::new("x", "y").finish(t);
        assert_eq!(c.verdict, Verdict::Fail);
        assert!((c.pass_fraction - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(Certificate::new("x", "y").finish(Tally::default()).verdict, Verdict::Degenerate);
    }

    #[test]
    fn unknown_suite_lists_names() {
        let err = run_suite("bogus", &SimulationConfig::default(), &VerifySettings::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("klowcut") && msg.contains("all"));
    }
}
