use super::{
    cutoff_chi, maxwellian, radial_moment, radial_moment_one_minus_chi, ModelParams, VelocityGrid,
    ANGULAR_CONSTANT,
};
use crate::error::Result;

/// Quadrature weights W(d) of the singular factor |v − u|^γ indexed by the
/// node offset d = i − j. Symmetric: W(d) = W(−d). The support lists the
/// nonzero offsets in the positive half space (d > 0 lexicographically);
/// the self-cell weight W(0) is stored separately.
#[derive(Debug, Clone)]
pub struct OffsetWeights {
    n: usize,
    dense: Vec<f64>,
    support: Vec<[i32; 3]>,
    self_weight: f64,
}

impl OffsetWeights {
    /// Builds weights from `f(d)` for every nonzero offset in the half space.
    pub fn from_fn(n: usize, self_weight: f64, mut f: impl FnMut([i32; 3]) -> f64) -> Self {
        let m = n as i32;
        let side = 2 * n - 1;
        let mut dense = vec![0.0; side * side * side];
        let mut support = Vec::new();
        for dx in -(m - 1)..m {
            for dy in -(m - 1)..m {
                for dz in -(m - 1)..m {
                    let d = [dx, dy, dz];
                    if !is_positive_half(d) {
                        continue;
                    }
                    let w = f(d);
                    if w != 0.0 {
                        support.push(d);
                        dense[dense_index(n, d)] = w;
                        dense[dense_index(n, [-dx, -dy, -dz])] = w;
                    }
                }
            }
        }
        dense[dense_index(n, [0, 0, 0])] = self_weight;
        Self {
            n,
            dense,
            support,
            self_weight,
        }
    }

    #[inline]
    pub fn get(&self, d: [i32; 3]) -> f64 {
        self.dense[dense_index(self.n, d)]
    }

    pub fn self_weight(&self) -> f64 {
        self.self_weight
    }

    pub fn support(&self) -> &[[i32; 3]] {
        &self.support
    }

    pub fn n_per_dim(&self) -> usize {
        self.n
    }

    /// Pointwise product with a factor depending on the offset; the self
    /// weight is scaled by `factor([0,0,0])`.
    pub fn scaled(&self, mut factor: impl FnMut([i32; 3]) -> f64) -> Self {
        let self_weight = self.self_weight * factor([0, 0, 0]);
        Self::from_fn(self.n, self_weight, |d| self.get(d) * factor(d))
    }

    /// Sum of all weights, Σ_d W(d).
    pub fn total(&self) -> f64 {
        self.self_weight + 2.0 * self.support.iter().map(|&d| self.get(d)).sum::<f64>()
    }
}

#[inline]
pub(crate) fn is_positive_half(d: [i32; 3]) -> bool {
    d[0] > 0 || (d[0] == 0 && (d[1] > 0 || (d[1] == 0 && d[2] > 0)))
}

#[inline]
fn dense_index(n: usize, d: [i32; 3]) -> usize {
    let side = 2 * n - 1;
    let o = n as i32 - 1;
    (((d[0] + o) as usize) * side + (d[1] + o) as usize) * side + (d[2] + o) as usize
}

/// Precomputed kernel data for one grid and model: the offset weights of
/// |v − u|^γ (with the self cell integrated exactly over a ball of volume
/// h³), and the χ values per offset.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: VelocityGrid,
    params: ModelParams,
    weights: OffsetWeights,
}

impl KernelTable {
    pub fn new(grid: &VelocityGrid, params: &ModelParams) -> Self {
        let h = grid.spacing();
        let gamma = params.gamma;
        let cell = grid.cell_volume();
        let self_weight = 4.0 * std::f64::consts::PI * radial_moment(ball_radius(h), gamma);
        let weights = OffsetWeights::from_fn(grid.n_per_dim(), self_weight, |d| {
            cell * (offset_length(d) * h).powf(gamma)
        });
        Self {
            grid: grid.clone(),
            params: *params,
            weights,
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn weights(&self) -> &OffsetWeights {
        &self.weights
    }

    /// χ(|v_i − u_j|) for the node pair.
    pub fn chi(&self, i: usize, j: usize) -> f64 {
        let d = self.offset(i, j);
        cutoff_chi(offset_length(d) * self.grid.spacing(), &self.params)
    }

    /// k₁ between two distinct nodes.
    pub fn k1(&self, i: usize, j: usize) -> Result<f64> {
        super::kernel_k1(&self.grid.node(i), &self.grid.node(j), &self.params)
    }

    /// Quadrature weight of k₁ for the pair, including the cell-averaged
    /// self term: 2π W(i − j) √μ(v_i) √μ(u_j).
    pub fn k1_weight(&self, i: usize, j: usize) -> f64 {
        let sm = self.grid.sqrt_mu();
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        ANGULAR_CONSTANT * self.weights.get(self.offset(i, j)) * (sm[a] * sm[b])
    }

    fn offset(&self, i: usize, j: usize) -> [i32; 3] {
        let a = self.grid.unflat(i);
        let b = self.grid.unflat(j);
        [
            a[0] as i32 - b[0] as i32,
            a[1] as i32 - b[1] as i32,
            a[2] as i32 - b[2] as i32,
        ]
    }

    /// Splits W into the χ and 1 − χ parts for the cutoff ε of `params`.
    /// The self cell uses the exact ball integrals of χ r^{γ+2} and
    /// (1 − χ) r^{γ+2}; other offsets are multiplied by χ(|d| h).
    pub fn chi_split(&self, params: &ModelParams) -> (OffsetWeights, OffsetWeights) {
        let h = self.grid.spacing();
        let four_pi = 4.0 * std::f64::consts::PI;
        let rb = ball_radius(h);
        let near_self = four_pi * radial_moment_one_minus_chi(rb, params);
        let far_self = self.weights.self_weight() - near_self;
        let chi = |d: [i32; 3]| cutoff_chi(offset_length(d) * h, params);
        let far = self.weights.scaled(|d| if d == [0, 0, 0] { 1.0 } else { chi(d) });
        let far = OffsetWeights { self_weight: far_self, ..far };
        let mut far = far;
        far.dense[dense_index(far.n, [0, 0, 0])] = far_self;
        let mut near = self
            .weights
            .scaled(|d| if d == [0, 0, 0] { 1.0 } else { 1.0 - chi(d) });
        near.self_weight = near_self;
        near.dense[dense_index(near.n, [0, 0, 0])] = near_self;
        (far, near)
    }

    /// Maxwellian at node `i` (convenience for callers holding only a table).
    pub fn mu_at(&self, i: usize) -> f64 {
        maxwellian(&self.grid.node(i))
    }
}

/// Radius of the ball with the volume of one grid cell.
pub(crate) fn ball_radius(h: f64) -> f64 {
    (3.0 / (4.0 * std::f64::consts::PI)).cbrt() * h
}

#[inline]
pub(crate) fn offset_length(d: [i32; 3]) -> f64 {
    ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt()
}
