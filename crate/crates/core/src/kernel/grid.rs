use serde::{Deserialize, Serialize};

use super::{maxwellian_sq, Vec3};
use crate::error::{Error, Result};

/// Uniform cubic truncation [−R, R)³ of velocity space, sampled at cell
/// centers. Quadrature is the midpoint rule with weight h³ per node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "GridSpec", try_from = "GridSpec")]
pub struct VelocityGrid {
    radius: f64,
    n: usize,
    spacing: f64,
    mu: Vec<f64>,
    sqrt_mu: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radius: f64,
    pub n: usize,
}

impl From<VelocityGrid> for GridSpec {
    fn from(g: VelocityGrid) -> Self {
        GridSpec {
            radius: g.radius,
            n: g.n,
        }
    }
}

impl TryFrom<GridSpec> for VelocityGrid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        VelocityGrid::new(s.radius, s.n)
    }
}

impl PartialEq for VelocityGrid {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.n == other.n
    }
}

pub const MIN_NODES_PER_DIM: usize = 8;
pub const MAX_RADIUS: f64 = 20.0;

impl VelocityGrid {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius <= MAX_RADIUS) {
            return Err(Error::InvalidParameter {
                name: "grid.radius",
                value: radius,
                condition: "0 < R ≤ 20",
            });
        }
        if n < MIN_NODES_PER_DIM {
            return Err(Error::InvalidParameter {
                name: "grid.n",
                value: n as f64,
                condition: "N ≥ 8 nodes per dimension",
            });
        }
        let spacing = 2.0 * radius / n as f64;
        let mut grid = Self {
            radius,
            n,
            spacing,
            mu: Vec::new(),
            sqrt_mu: Vec::new(),
        };
        grid.mu = (0..grid.len())
            .map(|i| maxwellian_sq(super::norm_sq(&grid.node(i))))
            .collect();
        grid.sqrt_mu = grid.mu.iter().map(|m| m.sqrt()).collect();
        Ok(grid)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            radius: self.radius,
            n: self.n,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_per_dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of nodes, N³.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight h³ of every node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Coordinate of the `i`-th node along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.radius + (i as f64 + 0.5) * self.spacing
    }

    #[inline]
    pub fn flat(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Vec3 {
        let [ix, iy, iz] = self.unflat(idx);
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec3> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Integer key of |v|² at node `idx`: Σ (2i − N + 1)², shared by every
    /// node on the same sphere.
    pub fn radial_key(&self, idx: usize) -> u64 {
        self.unflat(idx)
            .iter()
            .map(|&i| {
                let k = 2 * i as i64 + 1 - self.n as i64;
                (k * k) as u64
            })
            .sum()
    }

    /// Maxwellian sampled at the nodes.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    /// Midpoint-rule integral of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Discrete mass of μ; equals 1 up to truncation and quadrature error.
    pub fn maxwellian_mass(&self) -> f64 {
        self.integrate(&self.mu)
    }

    /// Bound on the Maxwellian mass outside the box, used as the recorded
    /// truncation tolerance: 3 · P(|Z| > R) for a standard normal Z, bounded
    /// through the Mills ratio, plus a round-off floor.
    pub fn truncation_tolerance(&self) -> f64 {
        let r = self.radius;
        let tail = 2.0 * (-0.5 * r * r).exp() / (r * (2.0 * std::f64::consts::PI).sqrt());
        3.0 * tail + 1e-13
    }

    pub fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.len() {
            return Err(Error::GridMismatch(format!(
                "{what} has {len} values, grid has {}",
                self.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_cell_centers() {
        let g = VelocityGrid::new(8.0, 32).unwrap();
        assert_eq!(g.len(), 32 * 32 * 32);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coord(0), -7.75);
        assert_eq!(g.coord(31), 7.75);
        let idx = g.flat(3, 17, 30);
        assert_eq!(g.unflat(idx), [3, 17, 30]);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(VelocityGrid::new(8.0, 2).is_err());
        assert!(VelocityGrid::new(0.0, 16).is_err());
        assert!(VelocityGrid::new(25.0, 16).is_err());
    }

    #[test]
    fn maxwellian_mass_is_one() {
        let g = VelocityGrid::new(8.0, 32).unwrap();
        assert!((g.maxwellian_mass() - 1.0).abs() < 1e-6);
        assert!(g.truncation_tolerance() < 1e-12);
    }

    #[test]
    fn radial_key_is_rotation_invariant() {
        let g = VelocityGrid::new(4.0, 8).unwrap();
        assert_eq!(g.radial_key(g.flat(1, 2, 6)), g.radial_key(g.flat(6, 1, 5)));
        let v = g.node(g.flat(1, 2, 6));
        let r2 = super::super::norm_sq(&v);
        let key = g.radial_key(g.flat(1, 2, 6)) as f64;
        assert!((r2 - key * g.spacing().powi(2) / 4.0).abs() < 1e-12);
    }
}
