use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::initial::InitialData;
use super::record::{Row, TimeSeriesRecord};
use super::step::{evolve_h_form, picard_step, HFormTerms, SimulationState, StepOptions};
use crate::collision::{
    boltzmann_h, entropy_l2_split, relative_entropy, weight_table, ConservationProjector,
    DistributionField, Representation, SpatialLayout,
};
use crate::error::{Error, Result};
use crate::kernel::{CollisionQuadrature, GridSpec, ModelParams, OutOfGrid, SphereRule, VelocityGrid};
use crate::weights::WeightParams;

pub const DEFAULT_INSTABILITY_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    /// Semi-implicit update of F.
    #[default]
    Picard,
    /// Integrating-factor update of h = w f.
    HForm,
}

/// Everything a run needs besides output settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: ModelParams,
    pub weights: WeightParams,
    pub grid: GridSpec,
    pub sphere_rule: SphereRule,
    pub out_of_grid: OutOfGrid,
    pub layout: SpatialLayout,
    pub init: InitialData,
    pub dt: f64,
    pub t_end: f64,
    pub stepper: Stepper,
    pub step: StepOptions,
    /// Abort once sup|h| exceeds this multiple of its initial value.
    pub instability_factor: f64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::new(-1.0, 0.1).expect("default model"),
            weights: WeightParams::new(0.5, 1.0, 3.5, -1.0).expect("default weights"),
            grid: GridSpec { radius: 6.0, n: 12 },
            sphere_rule: SphereRule::default(),
            out_of_grid: OutOfGrid::default(),
            layout: SpatialLayout::Homogeneous,
            init: InitialData::Bump {
                amplitude: 0.1,
                mode: 1,
            },
            dt: 0.1,
            t_end: 10.0,
            stepper: Stepper::Picard,
            step: StepOptions::default(),
            instability_factor: DEFAULT_INSTABILITY_FACTOR,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.weights.validate(self.model.gamma)?;
        VelocityGrid::new(self.grid.radius, self.grid.n)?;
        self.layout.validate()?;
        self.init.validate()?;
        self.step.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "time.dt",
                value: self.dt,
                condition: "dt > 0",
            });
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "time.t_end",
                value: self.t_end,
                condition: "t_end ≥ 0",
            });
        }
        if !(self.instability_factor > 1.0) {
            return Err(Error::InvalidParameter {
                name: "solver.instability_factor",
                value: self.instability_factor,
                condition: "factor > 1",
            });
        }
        Ok(())
    }

    /// Number of steps; t_end is rounded to the nearest multiple of dt.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn quadrature(&self) -> Result<CollisionQuadrature> {
        let grid = VelocityGrid::new(self.grid.radius, self.grid.n)?;
        CollisionQuadrature::new(&grid, &self.model, self.sphere_rule, self.out_of_grid)
    }
}

/// Row of diagnostics for an F-absolute field. Entropy columns are NaN
/// when F has negative values, which only the h-form stepper can produce.
pub fn diagnostics(f: &DistributionField, t: f64, wp: &WeightParams, leakage: f64) -> Result<Row> {
    let pert = perturbation(f);
    let w = weight_table(f.grid(), t, wp);
    let n = w.len();
    let h_sup = pert
        .values()
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (k, x)| m.max((w[k % n] * x).abs()));
    let nonneg = f.check_nonnegative().is_ok();
    let (h_functional, rel_entropy, split_a, split_b) = if nonneg {
        let (a, b) = entropy_l2_split(&pert)?;
        (boltzmann_h(f)?, relative_entropy(f)?, a, b)
    } else {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(Row {
        t,
        h_sup,
        f_l2: pert.l2_norm(),
        moments: f.moments(),
        h_functional,
        rel_entropy,
        leakage,
        split_a,
        split_b,
    })
}

// (F − μ)/√μ without the nonnegativity check on F.
fn perturbation(f: &DistributionField) -> DistributionField {
    let grid = f.grid();
    let (mu, sm) = (grid.mu(), grid.sqrt_mu());
    let n = grid.len();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(k, x)| (x - mu[k % n]) / sm[k % n])
        .collect();
    DistributionField::new(Representation::FPerturbation, f.layout(), f.grid_arc().clone(), values)
        .expect("same shape")
}

// F = μ + √μ h/w, labelled F-absolute without the nonnegativity check.
fn absolute_from_h(h: &DistributionField, t: f64, wp: &WeightParams) -> Result<DistributionField> {
    let grid = h.grid();
    let w = weight_table(grid, t, wp);
    let (mu, sm) = (grid.mu(), grid.sqrt_mu());
    let n = grid.len();
    let mut out = DistributionField::zeros(Representation::FAbsolute, h.layout(), h.grid_arc().clone())?;
    for (k, (x, hv)) in out.values_mut().iter_mut().zip(h.values()).enumerate() {
        let i = k % n;
        *x = mu[i] + sm[i] * hv / w[i];
    }
    Ok(out)
}

fn unstable(row: &Row, reference: f64, factor: f64) -> bool {
    !row.h_sup.is_finite() || row.h_sup > factor * reference.max(1e-6)
}

/// Runs `config` from t = 0 to t_end and records one row per step plus
/// the initial row. Aborts with `unstable = true` when sup|h| blows up.
pub fn simulate(config: &SimulationConfig) -> Result<TimeSeriesRecord> {
    config.validate()?;
    let quad = config.quadrature()?;
    simulate_with(config, &quad)
}

/// `simulate` with a prebuilt quadrature for the configured grid and model.
pub fn simulate_with(config: &SimulationConfig, quad: &CollisionQuadrature) -> Result<TimeSeriesRecord> {
    config.validate()?;
    let grid = Arc::new(quad.grid().clone());
    if grid.radius() != config.grid.radius || grid.n_per_dim() != config.grid.n {
        return Err(Error::GridMismatch("quadrature grid differs from the configured grid".into()));
    }
    let wp = config.weights;
    let init = config.init.build(grid.clone(), config.layout, config.seed)?;
    let mut record = TimeSeriesRecord {
        clipped_fraction: init.clipped_fraction,
        ..TimeSeriesRecord::default()
    };
    let row0 = diagnostics(&init.field, 0.0, &wp, 0.0)?;
    let reference = row0.h_sup;
    record.rows.push(row0);
    let n_steps = config.n_steps();
    let dt = config.dt;

    match config.stepper {
        Stepper::Picard => {
            let projector = if config.step.conservation_project {
                Some(ConservationProjector::new(&grid)?)
            } else {
                None
            };
            let mut state = SimulationState::new(init.field)?;
            for k in 1..=n_steps {
                picard_step(quad, projector.as_ref(), &mut state, dt, &config.step)?;
                state.t = k as f64 * dt;
                state.field.check_nonnegative()?;
                let row = diagnostics(&state.field, state.t, &wp, state.leakage)?;
                record.limited_projections = state.limited_projections;
                record.transport_clipped = state.transport_clipped;
                let blown = unstable(&row, reference, config.instability_factor);
                record.rows.push(row);
                if blown {
                    record.unstable = true;
                    break;
                }
            }
        }
        Stepper::HForm => {
            let mut h = init.field.to_perturbation()?.to_weighted(0.0, &wp)?;
            let mut leakage = 0.0;
            for k in 1..=n_steps {
                let t0 = (k - 1) as f64 * dt;
                let (next, leak) = evolve_h_form(quad, &h, t0, dt, &wp, HFormTerms::default())?;
                h = next;
                leakage += leak;
                let t = k as f64 * dt;
                let f = absolute_from_h(&h, t, &wp)?;
                let row = diagnostics(&f, t, &wp, leakage)?;
                let blown = unstable(&row, reference, config.instability_factor);
                record.rows.push(row);
                if blown {
                    record.unstable = true;
                    break;
                }
            }
        }
    }
    Ok(record)
}
