use serde::{Deserialize, Serialize};

use crate::collision::MomentVector;

/// Diagnostics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    /// sup |w(·, t) f|.
    pub h_sup: f64,
    /// Discrete L² norm of f = (F − μ)/√μ.
    pub f_l2: f64,
    pub moments: MomentVector,
    /// H(F) = ∫∫ F ln F.
    pub h_functional: f64,
    /// ℰ(F).
    pub rel_entropy: f64,
    /// Cumulative leakage up to t.
    pub leakage: f64,
    /// Small-amplitude part A of the entropy split.
    pub split_a: f64,
    /// Large-amplitude part B of the entropy split.
    pub split_b: f64,
}

/// Column names of the CSV export, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "t",
    "h_sup",
    "f_l2",
    "mass",
    "mom_x",
    "mom_y",
    "mom_z",
    "energy",
    "H",
    "rel_entropy",
    "leakage",
];

impl Row {
    pub fn csv_values(&self) -> [f64; 11] {
        let m = &self.moments;
        [
            self.t,
            self.h_sup,
            self.f_l2,
            m.mass,
            m.momentum[0],
            m.momentum[1],
            m.momentum[2],
            m.energy,
            self.h_functional,
            self.rel_entropy,
            self.leakage,
        ]
    }
}

/// Time series of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub rows: Vec<Row>,
    /// Set when the run was aborted by the instability detector.
    pub unstable: bool,
    /// Fraction of mass removed when clipping the initial datum at zero.
    pub clipped_fraction: f64,
    /// Collision steps whose conservation correction was scaled back.
    pub limited_projections: usize,
    /// Mass removed by clipping transport undershoots.
    pub transport_clipped: f64,
}

impl TimeSeriesRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn completed_steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn h_sup(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h_sup).collect()
    }

    pub fn rel_entropy(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rel_entropy).collect()
    }

    /// Record with the given sup-norm series and zero elsewhere; used for
    /// fixtures and fit checks.
    pub fn synthetic(times: &[f64], h_sup: &[f64]) -> Self {
        let rows = times
            .iter()
            .zip(h_sup)
            .map(|(&t, &h)| Row {
                t,
                h_sup: h,
                f_l2: 0.0,
                moments: MomentVector::default(),
                h_functional: 0.0,
                rel_entropy: 0.0,
                leakage: 0.0,
                split_a: 0.0,
                split_b: 0.0,
            })
            .collect();
        Self {
            rows,
            ..Self::default()
        }
    }
}
