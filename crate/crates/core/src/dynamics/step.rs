use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::collision::{
    gamma_nl, ConservationProjector, DistributionField, Representation, SpatialLayout,
};
use crate::error::{Error, Result};
use crate::kernel::{norm_sq, CollisionQuadrature};
use crate::weights::{semigroup_g_sq, weight_sq, WeightParams};

pub const MAX_INNER_ITERATIONS: usize = 5;

/// Options of the semi-implicit collision update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// Project each collision increment onto zero mass, momentum, energy.
    pub conservation_project: bool,
    /// Sweeps of the frozen-time iteration per step (1 to 5).
    pub inner_iterations: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            conservation_project: true,
            inner_iterations: 1,
        }
    }
}

impl StepOptions {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_INNER_ITERATIONS).contains(&self.inner_iterations) {
            return Err(Error::InvalidParameter {
                name: "solver.inner_iterations",
                value: self.inner_iterations as f64,
                condition: "1 ≤ inner_iterations ≤ 5",
            });
        }
        Ok(())
    }
}

/// Mutable state of one run; F is kept in absolute form.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub t: f64,
    pub field: DistributionField,
    pub steps: usize,
    /// Σ dt × (gain contribution from post-collision points off the grid).
    pub leakage: f64,
    /// Steps where the conservation correction had to be scaled back to
    /// keep F nonnegative.
    pub limited_projections: usize,
    /// Mass removed by clipping spectral-transport undershoots.
    pub transport_clipped: f64,
}

impl SimulationState {
    pub fn new(field: DistributionField) -> Result<Self> {
        if field.representation() != Representation::FAbsolute {
            return Err(Error::GridMismatch("state must hold an F-absolute field".into()));
        }
        field.check_nonnegative()?;
        Ok(Self {
            t: 0.0,
            field,
            steps: 0,
            leakage: 0.0,
            limited_projections: 0,
            transport_clipped: 0.0,
        })
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "time.dt",
            value: dt,
            condition: "dt > 0",
        });
    }
    Ok(())
}

/// Free transport over `dt`: every velocity slice of a slab field is
/// shifted by v_x dt with periodic wraparound, by trigonometric
/// interpolation. The Nyquist mode of an even n_x is left in place so that
/// shifts compose exactly. Values are not clipped; an F field may come
/// back with small undershoots. Homogeneous fields are returned unchanged.
pub fn transport_step(field: &DistributionField, dt: f64) -> Result<DistributionField> {
    let (n_x, period) = match field.layout() {
        SpatialLayout::Homogeneous => return Ok(field.clone()),
        SpatialLayout::Slab1d { n_x, period } => (n_x, period),
    };
    let grid = field.grid();
    let n_v = grid.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n_x);
    let inv = planner.plan_fft_inverse(n_x);
    let mut out = field.clone();
    let mut buf = vec![Complex::new(0.0, 0.0); n_x];
    let norm = 1.0 / n_x as f64;
    for i in 0..n_v {
        let shift = grid.node(i)[0] * dt;
        for (x, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(field.values()[x * n_v + i], 0.0);
        }
        fwd.process(&mut buf);
        for (m, b) in buf.iter_mut().enumerate() {
            if 2 * m == n_x || m == 0 {
                continue;
            }
            let freq = if m < n_x / 2 + n_x % 2 { m as f64 } else { m as f64 - n_x as f64 };
            let k = std::f64::consts::TAU * freq / period;
            *b *= Complex::from_polar(1.0, -k * shift);
        }
        inv.process(&mut buf);
        for (x, b) in buf.iter().enumerate() {
            out.values_mut()[x * n_v + i] = b.re * norm;
        }
    }
    Ok(out)
}

/// One frozen-time sweep G ↦ [F + dt Q₊(G, G)] / [1 + dt I_G].
fn picard_map(
    quad: &CollisionQuadrature,
    f_old: &[f64],
    g: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, f64)> {
    let gain = quad.q_gain(g, g)?;
    let rate = quad.loss_rate(g)?;
    let out = f_old
        .iter()
        .zip(&gain.values)
        .zip(&rate)
        .map(|((f, q), r)| (f + dt * q) / (1.0 + dt * r))
        .collect();
    Ok((out, gain.leakage))
}

/// Iterates of the frozen-time map starting from G = F; returns
/// F⁽¹⁾, …, F⁽ᵐ⁾.
pub fn picard_iterates(
    quad: &CollisionQuadrature,
    f: &[f64],
    dt: f64,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    check_dt(dt)?;
    quad.grid().check_len(f.len(), "Picard operand")?;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let g = out.last().map(|v| v.as_slice()).unwrap_or(f);
        let (next, _) = picard_map(quad, f, g, dt)?;
        out.push(next);
    }
    Ok(out)
}

/// Successive-difference ratios ‖F⁽ᵐ⁺¹⁾ − F⁽ᵐ⁾‖∞ / ‖F⁽ᵐ⁾ − F⁽ᵐ⁻¹⁾‖∞ of the
/// frozen-time iteration (with F⁽⁰⁾ = F); a ratio whose denominator is
/// below 1e−13 sup|F| is reported as 0.
pub fn picard_contraction_ratios(
    quad: &CollisionQuadrature,
    f: &[f64],
    dt: f64,
    count: usize,
) -> Result<Vec<f64>> {
    let its = picard_iterates(quad, f, dt, count + 1)?;
    let sup_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let mut diffs = vec![sup_diff(&its[0], f)];
    for w in its.windows(2) {
        diffs.push(sup_diff(&w[1], &w[0]));
    }
    // differences at round-off level carry no contraction signal
    let floor = 1e-13 * f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(diffs
        .windows(2)
        .map(|d| if d[0] > floor { d[1] / d[0] } else { 0.0 })
        .collect())
}

/// Transport over dt followed by the semi-implicit collision update
/// F ← [F + dt Q₊(F, F)] / [1 + dt I_F] in every spatial cell.
pub fn picard_step(
    quad: &CollisionQuadrature,
    projector: Option<&ConservationProjector>,
    state: &mut SimulationState,
    dt: f64,
    opts: &StepOptions,
) -> Result<()> {
    check_dt(dt)?;
    opts.validate()?;
    let mut field = transport_step(&state.field, dt)?;
    let cell = field.grid().cell_volume() / field.n_space() as f64;
    for x in field.values_mut().iter_mut() {
        if *x < 0.0 {
            state.transport_clipped += -*x * cell;
            *x = 0.0;
        }
    }
    for x in 0..field.n_space() {
        let f_old = field.slice(x).to_vec();
        let mut g = f_old.clone();
        let mut leak = 0.0;
        for _ in 0..opts.inner_iterations {
            let (next, l) = picard_map(quad, &f_old, &g, dt)?;
            g = next;
            leak = l;
        }
        state.leakage += dt * leak / field.n_space() as f64;
        if opts.conservation_project {
            if let Some(p) = projector {
                let inc: Vec<f64> = g.iter().zip(&f_old).map(|(a, b)| a - b).collect();
                let corr = p.correction(&inc);
                // largest θ ≤ 1 keeping g − θ corr ≥ 0
                let mut theta: f64 = 1.0;
                for (gi, ci) in g.iter().zip(&corr) {
                    if *ci > 0.0 && gi - ci < 0.0 {
                        theta = theta.min(gi / ci);
                    }
                }
                if theta < 1.0 {
                    state.limited_projections += 1;
                }
                for (gi, ci) in g.iter_mut().zip(&corr) {
                    *gi = (*gi - theta * ci).max(0.0);
                }
            }
        }
        field.slice_mut(x).copy_from_slice(&g);
    }
    state.field = field;
    state.t += dt;
    state.steps += 1;
    Ok(())
}

/// Which right-hand-side terms the h-form stepper includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HFormTerms {
    pub kernel: bool,
    pub nonlinear: bool,
}

impl Default for HFormTerms {
    fn default() -> Self {
        Self {
            kernel: true,
            nonlinear: true,
        }
    }
}

/// One step of ∂ₜh + v·∇ₓh + ν̃h = K_w h + wΓ(f, f) with h = w f:
/// h ← G_v(t + dt, t)[h + dt(K_w h + wΓ(f, f))] after transport, where
/// G_v uses the discrete collision frequency of `quad`. Also returns dt
/// times the torus-averaged leakage of the K and Γ evaluations.
pub fn evolve_h_form(
    quad: &CollisionQuadrature,
    h: &DistributionField,
    t: f64,
    dt: f64,
    wp: &WeightParams,
    terms: HFormTerms,
) -> Result<(DistributionField, f64)> {
    check_dt(dt)?;
    if h.representation() != Representation::HWeighted {
        return Err(Error::GridMismatch("h-form step needs an h-weighted field".into()));
    }
    let moved = transport_step(h, dt)?;
    let grid = h.grid();
    let nu = quad.nu_grid();
    let speed_sq: Vec<f64> = grid.nodes().map(|v| norm_sq(&v)).collect();
    let w: Vec<f64> = speed_sq.iter().map(|&r2| weight_sq(r2, t, wp)).collect();
    let decay: Vec<f64> = speed_sq
        .iter()
        .zip(nu)
        .map(|(&r2, &n)| semigroup_g_sq(n, r2, t, t + dt, wp))
        .collect::<Result<_>>()?;
    let mut out = moved.clone();
    let mut leak = 0.0;
    for x in 0..moved.n_space() {
        let hs = moved.slice(x);
        let f: Vec<f64> = hs.iter().zip(&w).map(|(a, b)| a / b).collect();
        let mut rhs = vec![0.0; f.len()];
        if terms.kernel {
            let k = quad.apply_k(&f)?;
            leak += k.leakage;
            for (r, v) in rhs.iter_mut().zip(&k.values) {
                *r += v;
            }
        }
        if terms.nonlinear {
            let g = gamma_nl(quad, &f, &f)?;
            leak += g.leakage;
            for (r, v) in rhs.iter_mut().zip(&g.values) {
                *r += v;
            }
        }
        let dst = out.slice_mut(x);
        for i in 0..dst.len() {
            dst[i] = decay[i] * (hs[i] + dt * w[i] * rhs[i]);
        }
    }
    Ok((out, dt * leak / moved.n_space() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ModelParams, OutOfGrid, SphereRule, VelocityGrid};
    use std::sync::Arc;

    fn slab_field(n_x: usize) -> DistributionField {
        let grid = Arc::new(VelocityGrid::new(4.0, 8).unwrap());
        let layout = SpatialLayout::Slab1d { n_x, period: 2.0 };
        let n_v = grid.len();
        let mut values = Vec::new();
        for x in 0..n_x {
            for i in 0..n_v {
                let xx = x as f64 / n_x as f64;
                values.push(grid.mu()[i] * (1.0 + 0.5 * (std::f64::consts::TAU * xx).cos() + 0.2 * (2.0 * std::f64::consts::TAU * xx).sin()));
            }
        }
        DistributionField::new(Representation::FAbsolute, layout, grid, values).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn transport_identities() {
        for n_x in [8, 9] {
            let f = slab_field(n_x);
            let full = transport_step(&f, 0.3).unwrap();
            let half = transport_step(&transport_step(&f, 0.15).unwrap(), 0.15).unwrap();
            assert!(max_diff(full.values(), half.values()) < 1e-12);
            let m0 = f.moments();
            assert!(full.moments().relative_drift(&m0) < 1e-12);
        }
        // a velocity with v_x dt equal to the period returns to the start
        let f = slab_field(8);
        let grid = f.grid().clone();
        let vx = grid.coord(7);
        let back = transport_step(&f, 2.0 / vx).unwrap();
        let n_v = grid.len();
        for x in 0..8 {
            for i in 0..n_v {
                if grid.unflat(i)[0] == 7 {
                    assert!((back.values()[x * n_v + i] - f.values()[x * n_v + i]).abs() < 1e-12);
                }
            }
        }
        let hom = DistributionField::maxwellian(Arc::new(VelocityGrid::new(4.0, 8).unwrap()), SpatialLayout::Homogeneous).unwrap();
        assert_eq!(transport_step(&hom, 0.5).unwrap().values(), hom.values());
    }

    fn quad() -> CollisionQuadrature {
        let grid = VelocityGrid::new(5.0, 8).unwrap();
        let p = ModelParams::new(-1.0, 0.3).unwrap();
        CollisionQuadrature::new(&grid, &p, SphereRule::Lebedev14, OutOfGrid::Clamp).unwrap()
    }

    #[test]
    fn maxwellian_is_a_fixed_point() {
        let q = quad();
        let grid = Arc::new(q.grid().clone());
        let f = DistributionField::maxwellian(grid, SpatialLayout::Homogeneous).unwrap();
        let mut s = SimulationState::new(f.clone()).unwrap();
        picard_step(&q, None, &mut s, 0.1, &StepOptions::default()).unwrap();
        for (a, b) in s.field.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
    }

    #[test]
    fn rejects_bad_dt_and_iteration_counts() {
        let q = quad();
        let grid = Arc::new(q.grid().clone());
        let f = DistributionField::maxwellian(grid, SpatialLayout::Homogeneous).unwrap();
        let mut s = SimulationState::new(f).unwrap();
        assert!(picard_step(&q, None, &mut s, 0.0, &StepOptions::default()).is_err());
        let bad = StepOptions { conservation_project: false, inner_iterations: 6 };
        assert!(picard_step(&q, None, &mut s, 0.1, &bad).is_err());
    }

    #[test]
    fn h_form_pure_decay_matches_semigroup() {
        let q = quad();
        let grid = Arc::new(q.grid().clone());
        let wp = WeightParams::new(0.5, 1.0, 3.5, -1.0).unwrap();
        let h0: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut h = DistributionField::new(Representation::HWeighted, SpatialLayout::Homogeneous, grid.clone(), h0.clone()).unwrap();
        let off = HFormTerms { kernel: false, nonlinear: false };
        let dt = 0.05;
        for n in 0..20 {
            h = evolve_h_form(&q, &h, n as f64 * dt, dt, &wp, off).unwrap().0;
        }
        for i in 0..grid.len() {
            let r2 = norm_sq(&grid.node(i));
            let g = semigroup_g_sq(q.nu_grid()[i], r2, 0.0, 20.0 * dt, &wp).unwrap();
            assert!((h.values()[i] - g * h0[i]).abs() <= 1e-13 * h0[i].abs().max(1e-300));
        }
    }
}
