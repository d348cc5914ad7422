use super::engine::{convolve, gain_sums, Operand, OutOfGrid};
use super::sphere::{SpherePoints, SphereRule};
use super::{KernelTable, ModelParams, OffsetWeights, VelocityGrid, ANGULAR_CONSTANT};
use crate::error::Result;

/// Operator output together with the integrated contribution of
/// post-collision points that fell outside the grid hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub values: Vec<f64>,
    pub leakage: f64,
}

/// K^χ f and K^{1−χ} f from one quadrature pass.
#[derive(Debug, Clone, PartialEq)]
pub struct KSplit {
    pub chi: Vec<f64>,
    pub one_minus_chi: Vec<f64>,
    pub leakage: f64,
}

/// Grid quadrature of the collision integrals: loss rates, the gain term,
/// K₁, K₂, K and the cutoff splits.
#[derive(Debug, Clone)]
pub struct CollisionQuadrature {
    table: KernelTable,
    rule: SphereRule,
    points: SpherePoints,
    out_of_grid: OutOfGrid,
    nu_grid: Vec<f64>,
}

impl CollisionQuadrature {
    pub fn new(
        grid: &VelocityGrid,
        params: &ModelParams,
        rule: SphereRule,
        out_of_grid: OutOfGrid,
    ) -> Result<Self> {
        params.validate()?;
        let table = KernelTable::new(grid, params);
        let nu_grid = convolve(grid, &[table.weights()], grid.mu())
            .pop()
            .expect("one table")
            .into_iter()
            .map(|s| ANGULAR_CONSTANT * s)
            .collect();
        Ok(Self {
            table,
            rule,
            points: rule.expand(),
            out_of_grid,
            nu_grid,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.table.grid()
    }

    pub fn params(&self) -> &ModelParams {
        self.table.params()
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn sphere_rule(&self) -> SphereRule {
        self.rule
    }

    pub fn out_of_grid(&self) -> OutOfGrid {
        self.out_of_grid
    }

    /// Collision frequency of the discrete scheme, ν_h = I_μ.
    pub fn nu_grid(&self) -> &[f64] {
        &self.nu_grid
    }

    /// I_G(v) = ∫∫ B(v − u, ω) G(u) dω du.
    pub fn loss_rate(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.grid().check_len(g.len(), "loss operand")?;
        Ok(self.convolve_scaled(self.table.weights(), g, ANGULAR_CONSTANT))
    }

    /// Σ_j W(i − j) μ_j Σ_k w_k a(u′_k) b(v′_k) for ratio fields a, b
    /// (`None` stands for the constant 1). Leakage is reported as
    /// 2π h³ Σ_i μ_i (clamped part of the sum).
    pub fn gain_ratio_sums(&self, a: Option<&[f64]>, b: Option<&[f64]>) -> Result<Evaluated> {
        let mut out = self.gain_multi(&[self.table.weights()], a, b)?;
        let (values, leak) = out.pop().expect("one table");
        let grid = self.grid();
        let leakage = ANGULAR_CONSTANT
            * grid.cell_volume()
            * leak.iter().zip(grid.mu()).map(|(l, m)| l * m).sum::<f64>();
        Ok(Evaluated { values, leakage })
    }

    /// Q₊(G, F)(v) = ∫∫ B G(u′) F(v′) dω du.
    pub fn q_gain(&self, g: &[f64], f: &[f64]) -> Result<Evaluated> {
        let grid = self.grid();
        grid.check_len(g.len(), "gain operand G")?;
        grid.check_len(f.len(), "gain operand F")?;
        let a = ratio(g, grid.mu());
        let b = ratio(f, grid.mu());
        let s = self.gain_ratio_sums(Some(&a), Some(&b))?;
        Ok(Evaluated {
            values: s
                .values
                .iter()
                .zip(grid.mu())
                .map(|(x, m)| ANGULAR_CONSTANT * m * x)
                .collect(),
            leakage: s.leakage,
        })
    }

    /// K₁f(v) = √μ(v) · 2π ∫ |v − u|^γ √μ(u) f(u) du.
    pub fn apply_k1(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.apply_k1_with(self.table.weights(), f)
    }

    /// K₁ with an arbitrary offset weight table in place of |v − u|^γ.
    pub fn apply_k1_with(&self, weights: &OffsetWeights, f: &[f64]) -> Result<Vec<f64>> {
        let grid = self.grid();
        grid.check_len(f.len(), "K₁ operand")?;
        let sm = grid.sqrt_mu();
        let g: Vec<f64> = f.iter().zip(sm).map(|(x, s)| x * s).collect();
        let c = self.convolve_scaled(weights, &g, ANGULAR_CONSTANT);
        Ok(c.iter().zip(sm).map(|(x, s)| x * s).collect())
    }

    /// K₂f(v) = ∫∫ B √μ(u) [√μ(v′) f(u′) + √μ(u′) f(v′)] dω du.
    pub fn apply_k2(&self, f: &[f64]) -> Result<Evaluated> {
        self.apply_k2_with(self.table.weights(), f)
    }

    pub fn apply_k2_with(&self, weights: &OffsetWeights, f: &[f64]) -> Result<Evaluated> {
        let mut out = self.k2_multi(&[weights], f)?;
        let (values, leakage) = out.pop().expect("one table");
        Ok(Evaluated { values, leakage })
    }

    /// K = K₂ − K₁.
    pub fn apply_k(&self, f: &[f64]) -> Result<Evaluated> {
        self.apply_k_with(self.table.weights(), f)
    }

    pub fn apply_k_with(&self, weights: &OffsetWeights, f: &[f64]) -> Result<Evaluated> {
        let k2 = self.apply_k2_with(weights, f)?;
        let k1 = self.apply_k1_with(weights, f)?;
        Ok(Evaluated {
            values: k2.values.iter().zip(&k1).map(|(a, b)| a - b).collect(),
            leakage: k2.leakage,
        })
    }

    /// (K^χ f, K^{1−χ} f) with χ(|v − u|) for the cutoff of `params`.
    pub fn apply_k_splits(&self, params: &ModelParams, f: &[f64]) -> Result<KSplit> {
        params.validate()?;
        let (far, near) = self.table.chi_split(params);
        let k2 = self.k2_multi(&[&far, &near], f)?;
        let k1_far = self.apply_k1_with(&far, f)?;
        let k1_near = self.apply_k1_with(&near, f)?;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        Ok(KSplit {
            chi: diff(&k2[0].0, &k1_far),
            one_minus_chi: diff(&k2[1].0, &k1_near),
            leakage: k2[0].1 + k2[1].1,
        })
    }

    fn k2_multi(&self, tables: &[&OffsetWeights], f: &[f64]) -> Result<Vec<(Vec<f64>, f64)>> {
        let grid = self.grid();
        grid.check_len(f.len(), "K₂ operand")?;
        let sm = grid.sqrt_mu();
        let rho = ratio(f, sm);
        let parts = self.gain_multi(tables, None, Some(&rho))?;
        let scale = 2.0 * ANGULAR_CONSTANT;
        let h3 = grid.cell_volume();
        Ok(parts
            .into_iter()
            .map(|(sums, leak)| {
                let values = sums.iter().zip(sm).map(|(x, s)| scale * s * x).collect();
                let leakage = scale * h3 * leak.iter().zip(sm).map(|(l, s)| l * s).sum::<f64>();
                (values, leakage)
            })
            .collect())
    }

    fn gain_multi(
        &self,
        tables: &[&OffsetWeights],
        a: Option<&[f64]>,
        b: Option<&[f64]>,
    ) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let grid = self.grid();
        for t in tables {
            if t.n_per_dim() != grid.n_per_dim() {
                return Err(crate::error::Error::GridMismatch(format!(
                    "weight table for N = {}, grid has N = {}",
                    t.n_per_dim(),
                    grid.n_per_dim()
                )));
            }
        }
        for x in [a, b].into_iter().flatten() {
            grid.check_len(x.len(), "gain ratio")?;
        }
        let out = gain_sums(grid, &self.points, tables, operand(a), operand(b), self.out_of_grid);
        Ok(out.sums.into_iter().zip(out.leak).collect())
    }

    fn convolve_scaled(&self, weights: &OffsetWeights, g: &[f64], scale: f64) -> Vec<f64> {
        convolve(self.grid(), &[weights], g)
            .pop()
            .expect("one table")
            .into_iter()
            .map(|x| scale * x)
            .collect()
    }
}

fn operand(x: Option<&[f64]>) -> Operand<'_> {
    match x {
        Some(r) => Operand::Ratio(r),
        None => Operand::One,
    }
}

fn ratio(f: &[f64], by: &[f64]) -> Vec<f64> {
    f.iter().zip(by).map(|(x, m)| x / m).collect()
}
