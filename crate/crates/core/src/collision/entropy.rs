use super::field::{DistributionField, Representation};
use crate::error::{Error, Result};
use crate::kernel::VelocityGrid;

/// a ln a − a + 1 written in x = a − 1, accurate near a = 1; equals 1 at a = 0.
fn entropy_kernel(a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    let x = a - 1.0;
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 12.0 - x2 * x / 20.0 + x2 * x2 / 30.0)
    } else {
        a * a.ln() - x
    }
}

fn require_absolute(f: &DistributionField) -> Result<()> {
    if f.representation() != Representation::FAbsolute {
        return Err(Error::GridMismatch(format!(
            "entropy needs an F-absolute field, got {:?}",
            f.representation()
        )));
    }
    f.check_nonnegative()
}

/// ∫ (F/μ ln(F/μ) − F/μ + 1) μ dv for one velocity slice.
pub fn relative_entropy_density(grid: &VelocityGrid, f: &[f64]) -> Result<f64> {
    grid.check_len(f.len(), "entropy operand")?;
    let mut acc = 0.0;
    for (i, (&x, &m)) in f.iter().zip(grid.mu()).enumerate() {
        if !(x >= 0.0) {
            return Err(Error::NegativeDensity { node: i, value: x });
        }
        acc += m * entropy_kernel(x / m);
    }
    Ok(acc * grid.cell_volume())
}

/// ℰ(F) = ∫∫ (F/μ ln(F/μ) − F/μ + 1) μ dv dx over the unit torus.
pub fn relative_entropy(f: &DistributionField) -> Result<f64> {
    require_absolute(f)?;
    let mut acc = 0.0;
    for s in f.slices() {
        acc += relative_entropy_density(f.grid(), s)?;
    }
    Ok(acc / f.n_space() as f64)
}

/// H(F) = ∫∫ F ln F dv dx with 0 ln 0 = 0.
pub fn boltzmann_h(f: &DistributionField) -> Result<f64> {
    require_absolute(f)?;
    let acc: f64 = f
        .values()
        .iter()
        .map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })
        .sum();
    Ok(acc * f.grid().cell_volume() / f.n_space() as f64)
}

/// (A, B) with A = ∫∫ ¼|f|² 1_{|f| ≤ √μ} and B = ∫∫ (√μ/4)|f| 1_{|f| > √μ}.
/// The boundary |f| = √μ counts towards A.
pub fn entropy_l2_split(f: &DistributionField) -> Result<(f64, f64)> {
    if f.representation() != Representation::FPerturbation {
        return Err(Error::GridMismatch(format!(
            "split needs an f-perturbation field, got {:?}",
            f.representation()
        )));
    }
    let grid = f.grid();
    let n = grid.len();
    let (mu, sm) = (grid.mu(), grid.sqrt_mu());
    let (mut a, mut b) = (0.0, 0.0);
    for (k, &x) in f.values().iter().enumerate() {
        let i = k % n;
        let big_f = mu[i] + sm[i] * x;
        if big_f < 0.0 {
            return Err(Error::NegativeDensity { node: k, value: big_f });
        }
        if x.abs() <= sm[i] {
            a += 0.25 * x * x;
        } else {
            b += 0.25 * sm[i] * x.abs();
        }
    }
    let scale = grid.cell_volume() / f.n_space() as f64;
    Ok((a * scale, b * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::SpatialLayout;
    use std::sync::Arc;

    fn grid() -> Arc<VelocityGrid> {
        Arc::new(VelocityGrid::new(8.0, 24).unwrap())
    }

    #[test]
    fn kernel_is_continuous_across_branches() {
        for &a in &[1.0 - 1.0001e-3, 1.0 - 0.9999e-3, 1.0 + 0.9999e-3, 1.0 + 1.0001e-3] {
            let direct = a * f64::ln(a) - a + 1.0;
            assert!((entropy_kernel(a) - direct).abs() < 1e-15);
        }
        assert_eq!(entropy_kernel(1.0), 0.0);
        assert_eq!(entropy_kernel(0.0), 1.0);
    }

    #[test]
    fn entropy_of_maxwellian_and_double() {
        let g = grid();
        let mu = DistributionField::maxwellian(g.clone(), SpatialLayout::Homogeneous).unwrap();
        assert_eq!(relative_entropy(&mu).unwrap(), 0.0);
        let doubled: Vec<f64> = g.mu().iter().map(|m| 2.0 * m).collect();
        let f2 = DistributionField::new(Representation::FAbsolute, SpatialLayout::Homogeneous, g, doubled).unwrap();
        let e = relative_entropy(&f2).unwrap();
        let exact = 2.0 * 2f64.ln() - 1.0;
        assert!((e - exact).abs() < 1e-6, "{e}");
    }

    #[test]
    fn split_boundary_case() {
        let g = grid();
        let f = DistributionField::new(
            Representation::FPerturbation,
            SpatialLayout::Homogeneous,
            g.clone(),
            g.sqrt_mu().to_vec(),
        )
        .unwrap();
        let (a, b) = entropy_l2_split(&f).unwrap();
        assert!((a - 0.25).abs() < 1e-6);
        assert_eq!(b, 0.0);
        let e = relative_entropy(&f.to_absolute().unwrap()).unwrap();
        assert!(a + b <= e);
    }

    #[test]
    fn h_functional_uses_zero_convention() {
        let g = Arc::new(VelocityGrid::new(4.0, 8).unwrap());
        let z = DistributionField::zeros(Representation::FAbsolute, SpatialLayout::Homogeneous, g.clone()).unwrap();
        assert_eq!(boltzmann_h(&z).unwrap(), 0.0);
        // ℰ of the zero field is the mass of μ
        assert!((relative_entropy(&z).unwrap() - g.maxwellian_mass()).abs() < 1e-15);
    }
}
