use nalgebra::{Matrix5, Vector5};

use crate::error::{Error, Result};
use crate::kernel::{norm_sq, VelocityGrid};

fn basis(v: &[f64; 3]) -> Vector5<f64> {
    Vector5::new(1.0, v[0], v[1], v[2], norm_sq(v))
}

/// ∫ q ψ dv for ψ ∈ {1, v₁, v₂, v₃, |v|²}.
pub fn moment_residuals(grid: &VelocityGrid, q: &[f64]) -> [f64; 5] {
    let mut acc = Vector5::zeros();
    for (i, x) in q.iter().enumerate() {
        acc += basis(&grid.node(i)) * *x;
    }
    (acc * grid.cell_volume()).into()
}

/// Removes the collision-invariant moments of a velocity field by
/// subtracting μ·p with p ∈ span{1, v, |v|²}. This is the orthogonal
/// projection in L²(μ⁻¹ dv) onto fields with zero mass, momentum and
/// energy; the correction decays like μ, so it leaves tails untouched.
#[derive(Debug, Clone)]
pub struct ConservationProjector {
    basis: Vec<Vector5<f64>>,
    profile: Vec<f64>,
    cell: f64,
    gram_inv: Matrix5<f64>,
}

impl ConservationProjector {
    pub fn new(grid: &VelocityGrid) -> Result<Self> {
        Self::with_profile(grid, grid.mu().to_vec())
    }

    /// Projector whose correction has the form ψ·p with the given positive
    /// profile ψ in place of μ.
    pub fn with_profile(grid: &VelocityGrid, profile: Vec<f64>) -> Result<Self> {
        grid.check_len(profile.len(), "projection profile")?;
        let basis: Vec<Vector5<f64>> = grid.nodes().map(|v| basis(&v)).collect();
        let cell = grid.cell_volume();
        let mut gram = Matrix5::zeros();
        for (b, m) in basis.iter().zip(&profile) {
            gram += b * b.transpose() * *m;
        }
        gram *= cell;
        let gram_inv = gram
            .try_inverse()
            .filter(|inv| inv.iter().all(|x| x.is_finite()))
            .ok_or_else(|| Error::Config("singular moment Gram matrix on this grid".into()))?;
        Ok(Self {
            basis,
            profile,
            cell,
            gram_inv,
        })
    }

    fn coefficients(&self, q: &[f64]) -> Vector5<f64> {
        let mut rhs = Vector5::zeros();
        for (b, x) in self.basis.iter().zip(q) {
            rhs += b * *x;
        }
        self.gram_inv * (rhs * self.cell)
    }

    /// ψ·p, the part of `q` carrying its invariant moments.
    pub fn correction(&self, q: &[f64]) -> Vec<f64> {
        let c = self.coefficients(q);
        self.basis
            .iter()
            .zip(&self.profile)
            .map(|(b, m)| m * c.dot(b))
            .collect()
    }

    pub fn project_in_place(&self, q: &mut [f64]) {
        let corr = self.correction(q);
        for (x, c) in q.iter_mut().zip(corr) {
            *x -= c;
        }
    }
}

/// Field with its discrete mass, momentum and energy moments removed.
pub fn conservation_project(grid: &VelocityGrid, q: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(q.len(), "projected field")?;
    let p = ConservationProjector::new(grid)?;
    let mut out = q.to_vec();
    p.project_in_place(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &VelocityGrid) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let v = grid.node(i);
                grid.mu()[i] * (1.0 + v[0] - 0.3 * v[1] * v[2] + 0.2 * norm_sq(&v)) + 1e-3 * (i as f64).sin() * grid.mu()[i]
            })
            .collect()
    }

    #[test]
    fn projected_moments_vanish() {
        let grid = VelocityGrid::new(6.0, 12).unwrap();
        let q = conservation_project(&grid, &sample(&grid)).unwrap();
        for r in moment_residuals(&grid, &q) {
            assert!(r.abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn projection_is_idempotent_and_contracts() {
        let grid = VelocityGrid::new(6.0, 12).unwrap();
        let q = conservation_project(&grid, &sample(&grid)).unwrap();
        let q2 = conservation_project(&grid, &q).unwrap();
        let sup = q.iter().zip(&q2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(sup <= 1e-12);
        let norm = |x: &[f64]| -> f64 { x.iter().zip(grid.mu()).map(|(a, m)| a * a / m).sum() };
        let raw = sample(&grid);
        assert!(norm(&q) <= norm(&raw));
    }

    #[test]
    fn rejects_length_mismatch() {
        let grid = VelocityGrid::new(6.0, 12).unwrap();
        assert!(conservation_project(&grid, &[0.0; 4]).is_err());
    }
}
