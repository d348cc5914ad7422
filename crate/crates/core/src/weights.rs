//! Time-involved velocity weight w_{q,ϑ,β}(v, t), the modified collision
//! frequency ν̃, the decay exponent ρ and the solution operator G_v(t, s).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{norm_sq, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub q: f64,
    pub vartheta: f64,
    pub beta: f64,
    /// Auxiliary exponent with q < s₀ < 1, used only by bound checks.
    pub s0: f64,
}

pub const MIN_BETA: f64 = 3.5;

impl WeightParams {
    /// Builds and validates against γ, with s₀ = (1 + q)/2.
    pub fn new(q: f64, vartheta: f64, beta: f64, gamma: f64) -> Result<Self> {
        let wp = Self {
            q,
            vartheta,
            beta,
            s0: default_s0(q),
        };
        wp.validate(gamma)?;
        Ok(wp)
    }

    pub fn with_s0(mut self, s0: f64, gamma: f64) -> Result<Self> {
        self.s0 = s0;
        self.validate(gamma)?;
        Ok(self)
    }

    pub fn validate(&self, gamma: f64) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameter {
                name: "weights.q",
                value: self.q,
                condition: "0 < q < 1",
            });
        }
        if !(self.s0 > self.q && self.s0 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "weights.s0",
                value: self.s0,
                condition: "q < s₀ < 1",
            });
        }
        if !(self.vartheta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights.vartheta",
                value: self.vartheta,
                condition: "ϑ ≥ 0",
            });
        }
        if !(self.vartheta < -2.0 / gamma) {
            return Err(Error::InvalidParameter {
                name: "weights.vartheta",
                value: self.vartheta,
                condition: "ϑ < −2/γ",
            });
        }
        if !(self.beta >= MIN_BETA) {
            return Err(Error::InvalidParameter {
                name: "weights.beta",
                value: self.beta,
                condition: "β ≥ 7/2",
            });
        }
        Ok(())
    }

    /// ϑ = 0 adds no coercivity to ν̃.
    pub fn no_added_coercivity(&self) -> bool {
        self.vartheta == 0.0
    }
}

pub fn default_s0(q: f64) -> f64 {
    0.5 * (1.0 + q)
}

/// q̃(t) = (q/2)(1 + (1 + t)^{−ϑ}), the Gaussian exponent of the weight
/// as w = ⟨v⟩^{2β} e^{q̃|v|²/4}.
pub fn q_tilde(t: f64, wp: &WeightParams) -> f64 {
    0.5 * wp.q * (1.0 + (1.0 + t).powf(-wp.vartheta))
}

/// w(v, t) = (1 + |v|²)^β exp{(q/8)(1 + (1 + t)^{−ϑ})|v|²}.
pub fn weight(v: &Vec3, t: f64, wp: &WeightParams) -> f64 {
    weight_sq(norm_sq(v), t, wp)
}

/// Weight as a function of |v|².
pub fn weight_sq(speed_sq: f64, t: f64, wp: &WeightParams) -> f64 {
    let expo = 0.125 * wp.q * (1.0 + (1.0 + t).powf(-wp.vartheta)) * speed_sq;
    (1.0 + speed_sq).powf(wp.beta) * expo.exp()
}

/// ν̃(v, t) = ν(v) + ϑ q |v|² / (8 (1 + t)^{ϑ+1}).
pub fn nu_tilde(v: &Vec3, t: f64, wp: &WeightParams, nu_of_v: f64) -> f64 {
    nu_tilde_sq(norm_sq(v), t, wp, nu_of_v)
}

pub fn nu_tilde_sq(speed_sq: f64, t: f64, wp: &WeightParams, nu_of_v: f64) -> f64 {
    nu_of_v + wp.vartheta * wp.q * speed_sq / (8.0 * (1.0 + t).powf(wp.vartheta + 1.0))
}

/// Exponent of the lower bound ν̃ ≳ (1 + t)^{(1+ϑ)γ/(2−γ)}.
pub fn nu_tilde_time_exponent(gamma: f64, vartheta: f64) -> f64 {
    (1.0 + vartheta) * gamma / (2.0 - gamma)
}

/// ρ = 1 + (1 + ϑ)γ/(2 − γ) ∈ (0, 1).
pub fn decay_exponent(gamma: f64, vartheta: f64) -> Result<f64> {
    if !(gamma > -3.0 && gamma < 0.0) {
        return Err(Error::InvalidParameter {
            name: "model.gamma",
            value: gamma,
            condition: "−3 < γ < 0",
        });
    }
    if !(vartheta >= 0.0 && vartheta < -2.0 / gamma) {
        return Err(Error::InvalidParameter {
            name: "weights.vartheta",
            value: vartheta,
            condition: "ϑ < −2/γ",
        });
    }
    Ok(1.0 + nu_tilde_time_exponent(gamma, vartheta))
}

/// ∫ₛᵗ ν̃(v, τ) dτ in closed form.
pub fn nu_tilde_integral(nu_of_v: f64, speed_sq: f64, s: f64, t: f64, wp: &WeightParams) -> f64 {
    let extra = if wp.vartheta == 0.0 {
        0.0
    } else {
        0.125 * wp.q * speed_sq * ((1.0 + s).powf(-wp.vartheta) - (1.0 + t).powf(-wp.vartheta))
    };
    nu_of_v * (t - s) + extra
}

/// G_v(t, s) = exp(−∫ₛᵗ ν̃(v, τ) dτ).
pub fn semigroup_g(nu_of_v: f64, v: &Vec3, s: f64, t: f64, wp: &WeightParams) -> Result<f64> {
    semigroup_g_sq(nu_of_v, norm_sq(v), s, t, wp)
}

pub fn semigroup_g_sq(nu_of_v: f64, speed_sq: f64, s: f64, t: f64, wp: &WeightParams) -> Result<f64> {
    if s > t {
        return Err(Error::TimeOrdering { s, t });
    }
    Ok((-nu_tilde_integral(nu_of_v, speed_sq, s, t, wp)).exp())
}
