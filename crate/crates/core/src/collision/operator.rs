use crate::error::Result;
use crate::kernel::{CollisionQuadrature, Evaluated, ANGULAR_CONSTANT};

/// Q₊(G, F)(v) = ∫∫ B(v − u, ω) G(u′) F(v′) dω du.
pub fn q_gain(quad: &CollisionQuadrature, g: &[f64], f: &[f64]) -> Result<Evaluated> {
    quad.q_gain(g, f)
}

/// Q₋(G, F)(v) = F(v) ∫∫ B(v − u, ω) G(u) dω du.
pub fn q_loss(quad: &CollisionQuadrature, g: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    quad.grid().check_len(f.len(), "loss operand F")?;
    let rate = quad.loss_rate(g)?;
    Ok(rate.iter().zip(f).map(|(r, x)| r * x).collect())
}

/// Q(F, F) = Q₊(F, F) − Q₋(F, F).
pub fn collision_operator(quad: &CollisionQuadrature, f: &[f64]) -> Result<Evaluated> {
    let gain = q_gain(quad, f, f)?;
    let loss = q_loss(quad, f, f)?;
    Ok(Evaluated {
        values: gain.values.iter().zip(&loss).map(|(a, b)| a - b).collect(),
        leakage: gain.leakage,
    })
}

/// Γ₊(g, f) = Q₊(√μ g, √μ f)/√μ.
pub fn gamma_plus(quad: &CollisionQuadrature, g: &[f64], f: &[f64]) -> Result<Evaluated> {
    let grid = quad.grid();
    grid.check_len(g.len(), "Γ operand g")?;
    grid.check_len(f.len(), "Γ operand f")?;
    let sm = grid.sqrt_mu();
    let a: Vec<f64> = g.iter().zip(sm).map(|(x, s)| x / s).collect();
    let b: Vec<f64> = f.iter().zip(sm).map(|(x, s)| x / s).collect();
    let s = quad.gain_ratio_sums(Some(&a), Some(&b))?;
    Ok(Evaluated {
        values: s
            .values
            .iter()
            .zip(sm)
            .map(|(x, r)| ANGULAR_CONSTANT * r * x)
            .collect(),
        leakage: s.leakage,
    })
}

/// Γ₋(g, f) = Q₋(√μ g, √μ f)/√μ = f · I_{√μ g}.
pub fn gamma_minus(quad: &CollisionQuadrature, g: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let grid = quad.grid();
    grid.check_len(g.len(), "Γ operand g")?;
    let lifted: Vec<f64> = g.iter().zip(grid.sqrt_mu()).map(|(x, s)| x * s).collect();
    q_loss(quad, &lifted, f)
}

/// Γ(g, f) = Γ₊(g, f) − Γ₋(g, f).
pub fn gamma_nl(quad: &CollisionQuadrature, g: &[f64], f: &[f64]) -> Result<Evaluated> {
    let plus = gamma_plus(quad, g, f)?;
    let minus = gamma_minus(quad, g, f)?;
    Ok(Evaluated {
        values: plus.values.iter().zip(&minus).map(|(a, b)| a - b).collect(),
        leakage: plus.leakage,
    })
}

/// ∫ Q(F, F) ln F dv; nonpositive for the exact operator.
pub fn entropy_production(quad: &CollisionQuadrature, f: &[f64]) -> Result<f64> {
    let q = collision_operator(quad, f)?;
    let grid = quad.grid();
    let mut acc = 0.0;
    for (i, (qi, fi)) in q.values.iter().zip(f).enumerate() {
        if *fi <= 0.0 {
            return Err(crate::error::Error::NegativeDensity { node: i, value: *fi });
        }
        acc += qi * fi.ln();
    }
    Ok(acc * grid.cell_volume())
}
