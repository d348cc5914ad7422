//! Collision kernel building blocks: model parameters, the global Maxwellian,
//! the collision frequency ν, the pointwise kernel k₁, the smooth cutoff χ and
//! the grid quadrature that realizes K₁, K₂ and the χ-splits as operators.

mod engine;
mod grid;
mod ops;
mod sphere;
mod table;

pub use engine::OutOfGrid;
pub use grid::{GridSpec, VelocityGrid};
pub use ops::{CollisionQuadrature, Evaluated, KSplit};
pub use sphere::SphereRule;
pub use table::{KernelTable, OffsetWeights};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// (2π)^{-3/2}
pub const MAXWELLIAN_NORM: f64 = 0.063_493_635_934_240_97;

/// ∫_{S²} |cos θ| dω, the angular constant of the |cos θ| cross section.
pub const ANGULAR_CONSTANT: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AngularModel {
    /// q₀(θ) = |cos θ|
    #[default]
    #[serde(rename = "abs-cos")]
    AbsCos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CutoffShape {
    /// χ = 3s² − 2s³ with s = (r − ε)/ε on the ramp ε < r < 2ε.
    #[default]
    #[serde(rename = "cubic-smoothstep")]
    CubicSmoothstep,
}

/// Physical parameters of the soft-potential cross section
/// B(v − u, ω) = |v − u|^γ q₀(θ) together with the cutoff ε used to split K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    #[serde(default)]
    pub angular_model: AngularModel,
    pub eps_cutoff: f64,
    #[serde(default)]
    pub cutoff_shape: CutoffShape,
}

impl ModelParams {
    pub fn new(gamma: f64, eps_cutoff: f64) -> Result<Self> {
        let params = Self {
            gamma,
            angular_model: AngularModel::AbsCos,
            eps_cutoff,
            cutoff_shape: CutoffShape::CubicSmoothstep,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > -3.0 && self.gamma < 0.0) {
            return Err(Error::InvalidParameter {
                name: "model.gamma",
                value: self.gamma,
                condition: "−3 < γ < 0",
            });
        }
        if !(self.eps_cutoff > 0.0 && self.eps_cutoff < 1.0) {
            return Err(Error::InvalidParameter {
                name: "model.eps_cutoff",
                value: self.eps_cutoff,
                condition: "0 < ε < 1",
            });
        }
        Ok(())
    }

    /// Same model with a different cutoff radius.
    pub fn with_eps(&self, eps_cutoff: f64) -> Result<Self> {
        let mut p = *self;
        p.eps_cutoff = eps_cutoff;
        p.validate()?;
        Ok(p)
    }
}

#[inline]
pub fn norm_sq(v: &Vec3) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

#[inline]
pub fn norm(v: &Vec3) -> f64 {
    norm_sq(v).sqrt()
}

/// μ(v) = (2π)^{-3/2} exp(−|v|²/2).
#[inline]
pub fn maxwellian(v: &Vec3) -> f64 {
    MAXWELLIAN_NORM * (-0.5 * norm_sq(v)).exp()
}

/// Maxwellian as a function of |v|².
#[inline]
pub fn maxwellian_sq(speed_sq: f64) -> f64 {
    MAXWELLIAN_NORM * (-0.5 * speed_sq).exp()
}

/// ⟨v⟩^a = (1 + |v|²)^{a/2}
#[inline]
pub fn japanese_bracket(v: &Vec3, a: f64) -> f64 {
    (1.0 + norm_sq(v)).powf(0.5 * a)
}

/// Smooth cutoff χ(r): 0 for r ≤ ε, 1 for r ≥ 2ε, cubic smoothstep in between.
pub fn cutoff_chi(r: f64, params: &ModelParams) -> f64 {
    let eps = params.eps_cutoff;
    if r <= eps {
        0.0
    } else if r >= 2.0 * eps {
        1.0
    } else {
        let s = (r - eps) / eps;
        s * s * (3.0 - 2.0 * s)
    }
}

/// ∫₀^R r^{γ+2} (1 − χ(r)) dr in closed form.
pub(crate) fn radial_moment_one_minus_chi(radius: f64, params: &ModelParams) -> f64 {
    let k = params.gamma + 2.0;
    let eps = params.eps_cutoff;
    let x = radius / eps;
    // Work in ρ = r/ε; 1 − χ = −4 + 12ρ − 9ρ² + 2ρ³ on [1, 2].
    let inner = |upper: f64| upper.powf(k + 1.0) / (k + 1.0);
    let scaled = if x <= 1.0 {
        inner(x)
    } else {
        let b = x.min(2.0);
        let coeffs = [-4.0, 12.0, -9.0, 2.0];
        let ramp: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let e = k + m as f64 + 1.0;
                c * (b.powf(e) - 1.0) / e
            })
            .sum();
        inner(1.0) + ramp
    };
    eps.powf(k + 1.0) * scaled
}

/// ∫₀^R r^{γ+2} dr
pub(crate) fn radial_moment(radius: f64, gamma: f64) -> f64 {
    radius.powf(gamma + 3.0) / (gamma + 3.0)
}

/// Pointwise k₁(v, u) = 2π |v − u|^γ √μ(u) √μ(v).
pub fn kernel_k1(v: &Vec3, u: &Vec3, params: &ModelParams) -> Result<f64> {
    let d = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
    let r = norm(&d);
    if r == 0.0 {
        return Err(Error::SingularPair);
    }
    Ok(ANGULAR_CONSTANT * r.powf(params.gamma) * (maxwellian(u) * maxwellian(v)).sqrt())
}

/// Mean of |a ê − b ω|^γ over ω ∈ S², for speeds a, b ≥ 0.
///
/// Closed form [(a+b)^{γ+2} − |a−b|^{γ+2}] / (2(γ+2)ab), evaluated without
/// cancellation near b ≪ a and near γ = −2.
#[cfg(test)]
pub(crate) fn sphere_mean_power(a: f64, b: f64, gamma: f64) -> f64 {
    sphere_mean_power_gap(a, b, (a - b).abs(), gamma)
}

// Same with |a − b| supplied, so callers that know the gap keep its digits.
fn sphere_mean_power_gap(a: f64, b: f64, gap: f64, gamma: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi <= 0.0 {
        return 0.0;
    }
    let k = gamma + 2.0;
    let x = lo / hi;
    if x < 1e-2 {
        let c2 = (k - 1.0) * (k - 2.0) / 6.0;
        let c4 = c2 * (k - 3.0) * (k - 4.0) / 20.0;
        let c6 = c4 * (k - 5.0) * (k - 6.0) / 42.0;
        let x2 = x * x;
        return hi.powf(gamma) * (1.0 + x2 * (c2 + x2 * (c4 + x2 * c6)));
    }
    let diff = gap;
    if diff <= 0.0 {
        // b = a: finite only for γ > −2, where |a−b|^{γ+2} vanishes.
        return if k > 0.0 {
            (2.0 * hi).powf(k) / (2.0 * k * hi * hi)
        } else {
            0.0
        };
    }
    let log_ratio = ((hi + lo) / diff).ln();
    let scaled = if k.abs() < 1e-300 {
        log_ratio
    } else {
        diff.powf(k) * (k * log_ratio).exp_m1() / k
    };
    scaled / (2.0 * hi * lo)
}

/// Collision frequency ν(v) = 2π ∫ |v − u|^γ μ(u) du via a one-dimensional
/// radial reduction, integrated with double-exponential quadrature split at
/// the kink s = |v|.
pub fn collision_frequency(v: &Vec3, params: &ModelParams) -> Result<f64> {
    collision_frequency_radial(norm(v), params.gamma)
}

const RADIAL_CUTOFF: f64 = 14.0;

pub(crate) fn collision_frequency_radial(speed: f64, gamma: f64) -> Result<f64> {
    let prefactor = ANGULAR_CONSTANT * 4.0 * std::f64::consts::PI * MAXWELLIAN_NORM;
    let integrand = |s: f64, gap: f64| {
        let val = s * s * (-0.5 * s * s).exp() * sphere_mean_power_gap(speed, s, gap, gamma);
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    let scale = (1.0 + speed * speed).powf(0.5 * gamma);
    let tol = 1e-14 * scale;
    // s = |v| ∓ τᵐ on either side of the kink, with m(γ + 3) ≥ 1, makes the
    // |s − |v||^{γ+2} singularity of γ < −2 integrable in τ without blow-up.
    let m = (1.0 / (gamma + 3.0)).ceil().max(2.0);
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut add = |sign: f64, len: f64| {
        let out = quadrature::double_exponential::integrate(
            |tau: f64| {
                let gap = tau.powf(m);
                m * tau.powf(m - 1.0) * integrand(speed + sign * gap, gap)
            },
            0.0,
            len.powf(1.0 / m),
            tol,
        );
        total += out.integral;
        err += out.error_estimate;
        evals += out.num_function_evaluations;
    };
    let kink = speed.min(RADIAL_CUTOFF);
    if kink > 0.0 {
        add(-1.0, kink);
    }
    if kink < RADIAL_CUTOFF {
        add(1.0, RADIAL_CUTOFF - kink);
    }
    if !total.is_finite() || err > 1e-8 * total.abs().max(scale) {
        return Err(Error::QuadratureNonConvergence {
            residual: err,
            evaluations: evals,
        });
    }
    Ok(prefactor * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_gamma() {
        assert!(ModelParams::new(-3.0, 0.1).is_err());
        assert!(ModelParams::new(0.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.1).is_err());
        assert!(ModelParams::new(-1.0, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 0.0).is_err());
        assert!(ModelParams::new(-2.9, 0.5).is_ok());
    }

    #[test]
    fn maxwellian_at_origin() {
        let m = maxwellian(&[0.0; 3]);
        assert!((m - 0.063_493_6).abs() < 1e-7);
        let v = [0.3, -1.2, 2.0];
        assert_eq!(maxwellian(&v), maxwellian(&[-0.3, 1.2, -2.0]));
    }

    #[test]
    fn chi_values() {
        let p = ModelParams::new(-1.0, 0.2).unwrap();
        assert_eq!(cutoff_chi(0.1, &p), 0.0);
        assert_eq!(cutoff_chi(0.6, &p), 1.0);
        assert!((cutoff_chi(0.3, &p) - 0.5).abs() < 1e-15);
        let mut last = 0.0;
        for i in 0..=100 {
            let c = cutoff_chi(0.2 + 0.2 * i as f64 / 100.0, &p);
            assert!(c >= last && (0.0..=1.0).contains(&c));
            last = c;
        }
    }

    #[test]
    fn k1_is_symmetric_and_singular_on_diagonal() {
        let p = ModelParams::new(-1.0, 0.1).unwrap();
        let v = [1.0, 0.0, 0.0];
        let u = [0.0; 3];
        let k = kernel_k1(&v, &u, &p).unwrap();
        let expected = (2.0 * std::f64::consts::PI).powf(-0.5) * (-0.25f64).exp();
        assert!((k - expected).abs() < 1e-14);
        assert!((k - 0.31068).abs() < 5e-5);
        assert_eq!(kernel_k1(&u, &v, &p).unwrap(), k);
        assert_eq!(kernel_k1(&v, &v, &p), Err(Error::SingularPair));
    }

    #[test]
    fn sphere_mean_branches_agree() {
        for &gamma in &[-0.5, -1.0, -2.0, -2.5, -1.999_999_9] {
            for &(a, b) in &[(1.0, 0.0099), (1.0, 0.0101), (2.0, 1.5), (0.5, 3.0)] {
                let direct = sphere_mean_power(a, b, gamma);
                // brute force over the polar angle with a fine midpoint rule
                let n = 200_000;
                let mut acc = 0.0;
                for i in 0..n {
                    let c = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
                    acc += (a * a + b * b - 2.0 * a * b * c).powf(0.5 * gamma);
                }
                acc /= n as f64;
                assert!(
                    (direct - acc).abs() < 1e-6 * acc,
                    "γ={gamma} a={a} b={b}: {direct} vs {acc}"
                );
            }
        }
    }

    #[test]
    fn one_minus_chi_moment_matches_quadrature() {
        let p = ModelParams::new(-1.5, 0.3).unwrap();
        for &r in &[0.1, 0.3, 0.45, 0.6, 1.0] {
            let n = 400_000;
            let dr = r / n as f64;
            let brute: f64 = (0..n)
                .map(|i| {
                    let x = (i as f64 + 0.5) * dr;
                    x.powf(p.gamma + 2.0) * (1.0 - cutoff_chi(x, &p)) * dr
                })
                .sum();
            let exact = radial_moment_one_minus_chi(r, &p);
            assert!((brute - exact).abs() < 1e-5 * exact, "{r}: {brute} vs {exact}");
        }
        let full = radial_moment(0.6, p.gamma);
        assert!((radial_moment_one_minus_chi(0.6, &p) - full).abs() > 0.0);
    }
}
