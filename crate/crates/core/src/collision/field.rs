use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{norm_sq, VelocityGrid};
use crate::weights::{weight_sq, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// F, the density itself.
    #[serde(rename = "F-absolute")]
    FAbsolute,
    /// f with F = μ + √μ f.
    #[serde(rename = "f-perturbation")]
    FPerturbation,
    /// h = w f.
    #[serde(rename = "h-weighted")]
    HWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpatialLayout {
    #[default]
    Homogeneous,
    /// Periodic 1-D slab in x with `n_x` equispaced points.
    Slab1d { n_x: usize, period: f64 },
}

impl SpatialLayout {
    pub fn n_space(&self) -> usize {
        match self {
            SpatialLayout::Homogeneous => 1,
            SpatialLayout::Slab1d { n_x, .. } => *n_x,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SpatialLayout::Slab1d { n_x, period } = *self {
            if n_x < 2 {
                return Err(Error::InvalidParameter {
                    name: "space.n_x",
                    value: n_x as f64,
                    condition: "n_x ≥ 2",
                });
            }
            if !(period > 0.0 && period.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "space.period",
                    value: period,
                    condition: "period > 0",
                });
            }
        }
        Ok(())
    }
}

/// Values over (space × velocity), space-major: slice x occupies
/// `values[x·N³ .. (x+1)·N³]`.
#[derive(Debug, Clone)]
pub struct DistributionField {
    representation: Representation,
    layout: SpatialLayout,
    grid: Arc<VelocityGrid>,
    values: Vec<f64>,
}

/// Mass, momentum and energy ½∫|v|²F, averaged over a unit-volume torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MomentVector {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl MomentVector {
    pub fn of_slice(grid: &VelocityGrid, values: &[f64]) -> Self {
        let mut m = MomentVector::default();
        for (i, &f) in values.iter().enumerate() {
            let v = grid.node(i);
            m.mass += f;
            for c in 0..3 {
                m.momentum[c] += v[c] * f;
            }
            m.energy += 0.5 * norm_sq(&v) * f;
        }
        m.scale(grid.cell_volume())
    }

    fn scale(mut self, s: f64) -> Self {
        self.mass *= s;
        self.energy *= s;
        for c in &mut self.momentum {
            *c *= s;
        }
        self
    }

    fn add(mut self, o: &MomentVector) -> Self {
        self.mass += o.mass;
        self.energy += o.energy;
        for c in 0..3 {
            self.momentum[c] += o.momentum[c];
        }
        self
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.mass,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            self.energy,
        ]
    }

    /// Largest change of any component relative to `reference`; momentum
    /// is measured against the mass, which sets its natural scale.
    pub fn relative_drift(&self, reference: &MomentVector) -> f64 {
        let mass_scale = reference.mass.abs().max(f64::MIN_POSITIVE);
        let energy_scale = reference.energy.abs().max(f64::MIN_POSITIVE);
        let mut worst = (self.mass - reference.mass).abs() / mass_scale;
        for c in 0..3 {
            worst = worst.max((self.momentum[c] - reference.momentum[c]).abs() / mass_scale);
        }
        worst.max((self.energy - reference.energy).abs() / energy_scale)
    }
}

impl DistributionField {
    pub fn new(
        representation: Representation,
        layout: SpatialLayout,
        grid: Arc<VelocityGrid>,
        values: Vec<f64>,
    ) -> Result<Self> {
        layout.validate()?;
        let expected = layout.n_space() * grid.len();
        if values.len() != expected {
            return Err(Error::GridMismatch(format!(
                "field has {} values, layout × grid needs {expected}",
                values.len()
            )));
        }
        let field = Self {
            representation,
            layout,
            grid,
            values,
        };
        if representation == Representation::FAbsolute {
            field.check_nonnegative()?;
        }
        Ok(field)
    }

    /// F = μ in every spatial slice.
    pub fn maxwellian(grid: Arc<VelocityGrid>, layout: SpatialLayout) -> Result<Self> {
        let values = grid.mu().repeat(layout.n_space());
        Self::new(Representation::FAbsolute, layout, grid, values)
    }

    pub fn zeros(
        representation: Representation,
        layout: SpatialLayout,
        grid: Arc<VelocityGrid>,
    ) -> Result<Self> {
        let values = vec![0.0; layout.n_space() * grid.len()];
        Self::new(representation, layout, grid, values)
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn layout(&self) -> SpatialLayout {
        self.layout
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    pub fn n_space(&self) -> usize {
        self.layout.n_space()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice(&self, x: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[x * n..(x + 1) * n]
    }

    pub fn slice_mut(&mut self, x: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.values[x * n..(x + 1) * n]
    }

    pub fn slices(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.grid.len())
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|&x| !(x >= 0.0)) {
            Some(node) => Err(Error::NegativeDensity {
                node,
                value: self.values[node],
            }),
            None => Ok(()),
        }
    }

    fn expect(&self, rep: Representation) -> Result<()> {
        if self.representation != rep {
            return Err(Error::GridMismatch(format!(
                "expected {rep:?} field, got {:?}",
                self.representation
            )));
        }
        Ok(())
    }

    fn mapped(&self, rep: Representation, mut map: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let n = self.grid.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &x)| map(k % n, x))
            .collect();
        Self::new(rep, self.layout, self.grid.clone(), values)
    }

    /// f = (F − μ)/√μ.
    pub fn to_perturbation(&self) -> Result<Self> {
        self.expect(Representation::FAbsolute)?;
        let (mu, sm) = (self.grid.mu(), self.grid.sqrt_mu());
        self.mapped(Representation::FPerturbation, |i, x| (x - mu[i]) / sm[i])
    }

    /// F = μ + √μ f; fails if F would be negative.
    pub fn to_absolute(&self) -> Result<Self> {
        self.expect(Representation::FPerturbation)?;
        let (mu, sm) = (self.grid.mu(), self.grid.sqrt_mu());
        self.mapped(Representation::FAbsolute, |i, x| mu[i] + sm[i] * x)
    }

    /// h = w(·, t) f.
    pub fn to_weighted(&self, t: f64, wp: &WeightParams) -> Result<Self> {
        self.expect(Representation::FPerturbation)?;
        let w = weight_table(&self.grid, t, wp);
        self.mapped(Representation::HWeighted, |i, x| w[i] * x)
    }

    /// f = h / w(·, t).
    pub fn from_weighted(&self, t: f64, wp: &WeightParams) -> Result<Self> {
        self.expect(Representation::HWeighted)?;
        let w = weight_table(&self.grid, t, wp);
        self.mapped(Representation::FPerturbation, |i, x| x / w[i])
    }

    /// Moments averaged over the unit-volume torus.
    pub fn moments(&self) -> MomentVector {
        let n_space = self.n_space();
        self.slices()
            .map(|s| MomentVector::of_slice(&self.grid, s))
            .fold(MomentVector::default(), |acc, m| acc.add(&m))
            .scale(1.0 / n_space as f64)
    }

    /// Discrete L² norm over the unit torus × grid.
    pub fn l2_norm(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|x| x * x).sum();
        (sq * self.grid.cell_volume() / self.n_space() as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// w(v_i, t) at every velocity node.
pub fn weight_table(grid: &VelocityGrid, t: f64, wp: &WeightParams) -> Vec<f64> {
    (0..grid.len())
        .map(|i| weight_sq(norm_sq(&grid.node(i)), t, wp))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<VelocityGrid> {
        Arc::new(VelocityGrid::new(6.0, 12).unwrap())
    }

    #[test]
    fn maxwellian_moments() {
        let g = Arc::new(VelocityGrid::new(8.0, 24).unwrap());
        let f = DistributionField::maxwellian(g.clone(), SpatialLayout::Homogeneous).unwrap();
        let m = f.moments();
        assert!((m.mass - 1.0).abs() < 1e-6);
        assert!(m.momentum.iter().all(|c| c.abs() < 1e-14));
        assert!((m.energy - 1.5).abs() < 1e-5);
    }

    #[test]
    fn round_trips() {
        let g = grid();
        let layout = SpatialLayout::Slab1d { n_x: 3, period: 1.0 };
        let mut vals = g.mu().repeat(3);
        for (k, v) in vals.iter_mut().enumerate() {
            *v *= 1.0 + 0.3 * (k as f64 * 0.1).sin();
        }
        let big_f = DistributionField::new(Representation::FAbsolute, layout, g.clone(), vals).unwrap();
        let f = big_f.to_perturbation().unwrap();
        let back = f.to_absolute().unwrap();
        for (a, b) in back.values().iter().zip(big_f.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300) + 1e-300);
        }
        let wp = WeightParams::new(0.5, 1.0, 3.5, -1.0).unwrap();
        let h = f.to_weighted(0.7, &wp).unwrap();
        let f2 = h.from_weighted(0.7, &wp).unwrap();
        for (a, b) in f2.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn rejects_negative_density_and_bad_lengths() {
        let g = grid();
        let mut vals = g.mu().to_vec();
        vals[5] = -1e-3;
        assert!(matches!(
            DistributionField::new(Representation::FAbsolute, SpatialLayout::Homogeneous, g.clone(), vals),
            Err(Error::NegativeDensity { node: 5, .. })
        ));
        assert!(DistributionField::new(
            Representation::FPerturbation,
            SpatialLayout::Homogeneous,
            g,
            vec![0.0; 3]
        )
        .is_err());
    }
}
