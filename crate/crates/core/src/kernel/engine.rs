//! Pair loops shared by every collision quadrature.
//!
//! The gain integral is evaluated in the σ-representation: for a node pair
//! (v_i, u_j) with index offset d = i − j, the post-collision points are
//! P_k = c + (|d|/2) σ_k and P_{k̄} = c − (|d|/2) σ_k around the center
//! c = i − d/2 (index coordinates). Fields enter as ratios to μ, so that
//! μ(u′)μ(v′) = μ(u)μ(v) is used exactly and only the smooth ratio is
//! interpolated. For a fixed (d, k) the fractional part of P_k is the same
//! for every i, which lets the interpolation stencils be tabulated per axis.
//! The pair sum S_ij is symmetric, so only offsets in the positive half
//! space are visited and each pair contributes to both endpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sphere::SpherePoints;
use super::table::{offset_length, OffsetWeights};
use super::VelocityGrid;

/// Treatment of post-collision points that leave the grid hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutOfGrid {
    /// Extend the ratio to μ as a constant along the outward normal of the
    /// hull. Keeps μ an exact discrete equilibrium.
    #[default]
    Clamp,
    /// Drop the sphere point; the field then loses that contribution.
    Drop,
}

/// A field entering the gain sum as its ratio to the Maxwellian.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Operand<'a> {
    One,
    Ratio(&'a [f64]),
}

/// Σ_j W(i − j) μ_j S_ij per node and weight table, plus the same sum
/// restricted to sphere points that left the hull (absolute values).
pub(crate) struct GainSums {
    pub sums: Vec<Vec<f64>>,
    pub leak: Vec<Vec<f64>>,
}

const CHUNKS: usize = 16;

#[derive(Clone, Copy, Default)]
struct Stencil {
    lo: usize,
    t: f64,
    out: bool,
}

fn axis_stencils(n: usize, delta: f64, out: &mut [Stencil]) {
    let top = (n - 1) as f64;
    for (i, s) in out.iter_mut().enumerate() {
        let p = i as f64 + delta;
        // tolerate round-off exactly on the hull
        let outside = p < -1e-12 || p > top + 1e-12;
        let p = p.clamp(0.0, top);
        let mut lo = p.floor() as usize;
        if lo >= n - 1 {
            lo = n - 2;
        }
        *s = Stencil {
            lo,
            t: p - lo as f64,
            out: outside,
        };
    }
}

#[inline]
fn value(op: Operand<'_>, idx: usize) -> f64 {
    match op {
        Operand::One => 1.0,
        Operand::Ratio(r) => r[idx],
    }
}

/// Union of the half-space supports, in a fixed order.
fn union_support(tables: &[&OffsetWeights]) -> Vec<[i32; 3]> {
    let mut all: Vec<[i32; 3]> = tables
        .iter()
        .flat_map(|t| t.support().iter().copied())
        .collect();
    all.sort_unstable();
    all.dedup();
    all
}

fn chunk_of(support: &[[i32; 3]], c: usize) -> impl Iterator<Item = [i32; 3]> + '_ {
    support.iter().skip(c).step_by(CHUNKS).copied()
}

fn sum_chunks(parts: Vec<Vec<Vec<f64>>>, n_tables: usize, len: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; len]; n_tables];
    for part in parts {
        for (acc, p) in out.iter_mut().zip(part) {
            for (a, b) in acc.iter_mut().zip(p) {
                *a += b;
            }
        }
    }
    out
}

#[inline]
fn valid_range(n: usize, d: i32) -> std::ops::Range<usize> {
    let n = n as i32;
    (d.max(0) as usize)..((n + d.min(0)) as usize)
}

/// Reusable buffers for one worker.
struct Scratch {
    t1: Vec<f64>,
    t2: Vec<f64>,
    ia: Vec<f64>,
    ib: Vec<f64>,
    s: Vec<f64>,
    l: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        let cap = n * n * n;
        Self {
            t1: vec![0.0; cap],
            t2: vec![0.0; cap],
            ia: vec![0.0; cap],
            ib: vec![0.0; cap],
            s: vec![0.0; cap],
            l: vec![0.0; cap],
        }
    }
}

type Box3 = [std::ops::Range<usize>; 3];

/// Trilinear interpolation of `arr` at i + δ for every i in the box,
/// one axis at a time. `st` holds the per-axis stencils (3 × n).
fn interp_box(arr: &[f64], n: usize, st: &[Stencil], bx: &Box3, t1: &mut [f64], t2: &mut [f64], out: &mut [f64]) {
    let (sx, sy, sz) = (&st[..n], &st[n..2 * n], &st[2 * n..3 * n]);
    let [rx, ry, rz] = bx;
    let span = |s: &[Stencil], r: &std::ops::Range<usize>| {
        let lo = s[r.start].lo.min(s[r.end - 1].lo);
        let hi = s[r.start].lo.max(s[r.end - 1].lo) + 1;
        (lo, hi)
    };
    let (x0, x1) = span(sx, rx);
    let (y0, y1) = span(sy, ry);
    let (nxs, nys) = (x1 - x0 + 1, y1 - y0 + 1);
    let nz = rz.len();
    let ny = ry.len();
    let zs = &sz[rz.clone()];
    // along z; interior stencils are a pure shift with one fraction
    let shift = zs[0].lo as isize - rz.start as isize;
    let uniform = zs
        .iter()
        .zip(rz.clone())
        .all(|(s, i)| !s.out && s.lo as isize - i as isize == shift && s.t == zs[0].t);
    for x in 0..nxs {
        for y in 0..nys {
            let row = ((x + x0) * n + y + y0) * n;
            let src = &arr[row..row + n];
            let dst = &mut t1[(x * nys + y) * nz..(x * nys + y + 1) * nz];
            if uniform {
                let t = zs[0].t;
                let lo = zs[0].lo;
                lerp_into(dst, &src[lo..lo + nz], &src[lo + 1..lo + 1 + nz], t);
            } else {
                for (d, s) in dst.iter_mut().zip(zs) {
                    let a = src[s.lo];
                    *d = a + s.t * (src[s.lo + 1] - a);
                }
            }
        }
    }
    // along y
    for x in 0..nxs {
        for (jy, s) in sy[ry.clone()].iter().enumerate() {
            let a0 = (x * nys + s.lo - y0) * nz;
            let dst = (x * ny + jy) * nz;
            let (lo, hi) = (&t1[a0..a0 + nz], &t1[a0 + nz..a0 + 2 * nz]);
            lerp_into(&mut t2[dst..dst + nz], lo, hi, s.t);
        }
    }
    // along x
    let plane = ny * nz;
    for (jx, s) in sx[rx.clone()].iter().enumerate() {
        let a0 = (s.lo - x0) * plane;
        let dst = jx * plane;
        let (lo, hi) = (&t2[a0..a0 + plane], &t2[a0 + plane..a0 + 2 * plane]);
        lerp_into(&mut out[dst..dst + plane], lo, hi, s.t);
    }
}

#[inline(always)]
fn scatter(dst: &mut [f64], src: &[f64], mu: &[f64], w: f64) {
    for ((d, s), m) in dst.iter_mut().zip(src).zip(mu) {
        *d += w * m * s;
    }
}

#[inline(always)]
fn lerp_into(dst: &mut [f64], lo: &[f64], hi: &[f64], t: f64) {
    for ((d, a), b) in dst.iter_mut().zip(lo).zip(hi) {
        *d = a + t * (b - a);
    }
}

pub(crate) fn gain_sums(
    grid: &VelocityGrid,
    sphere: &SpherePoints,
    tables: &[&OffsetWeights],
    a: Operand<'_>,
    b: Operand<'_>,
    mode: OutOfGrid,
) -> GainSums {
    let n = grid.n_per_dim();
    let len = grid.len();
    let mu = grid.mu();
    let nt = tables.len();
    let support = union_support(tables);
    let n_dirs = sphere.dirs.len();

    let parts: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut sums = vec![vec![0.0; len]; nt];
            let mut leak = vec![vec![0.0; len]; nt];
            let mut sten = vec![Stencil::default(); n_dirs * 3 * n];
            let mut sc = Scratch::new(n);
            let mut w = vec![0.0; nt];
            let mut oz = vec![false; n];
            for d in chunk_of(&support, c) {
                for (t, tab) in tables.iter().enumerate() {
                    w[t] = tab.get(d);
                }
                let half = 0.5 * offset_length(d);
                for (k, dir) in sphere.dirs.iter().enumerate() {
                    for ax in 0..3 {
                        let delta = -0.5 * d[ax] as f64 + half * dir[ax];
                        let start = (k * 3 + ax) * n;
                        axis_stencils(n, delta, &mut sten[start..start + n]);
                    }
                }
                let bx: Box3 = [valid_range(n, d[0]), valid_range(n, d[1]), valid_range(n, d[2])];
                let (nx, ny, nz) = (bx[0].len(), bx[1].len(), bx[2].len());
                let m = nx * ny * nz;
                sc.s[..m].fill(0.0);
                sc.l[..m].fill(0.0);
                let mut any_leak = false;
                for k in 0..n_dirs {
                    let kb = sphere.antipode[k];
                    let st_k = &sten[k * 3 * n..(k + 1) * 3 * n];
                    let st_kb = &sten[kb * 3 * n..(kb + 1) * 3 * n];
                    let wk = sphere.weights[k];
                    match b {
                        Operand::One => sc.ib[..m].fill(1.0),
                        Operand::Ratio(r) => interp_box(r, n, st_k, &bx, &mut sc.t1, &mut sc.t2, &mut sc.ib),
                    }
                    match a {
                        Operand::One => sc.ia[..m].fill(1.0),
                        Operand::Ratio(r) => interp_box(r, n, st_kb, &bx, &mut sc.t1, &mut sc.t2, &mut sc.ia),
                    }
                    let axis_out = |ax: usize, i: usize| st_k[ax * n + i].out || st_kb[ax * n + i].out;
                    let touches = (0..3).any(|ax| bx[ax].clone().any(|i| axis_out(ax, i)));
                    if !touches {
                        for ((s, x), y) in sc.s[..m].iter_mut().zip(&sc.ia[..m]).zip(&sc.ib[..m]) {
                            *s += wk * x * y;
                        }
                        continue;
                    }
                    any_leak = true;
                    for (jz, iz) in bx[2].clone().enumerate() {
                        oz[jz] = axis_out(2, iz);
                    }
                    for (jx, ix) in bx[0].clone().enumerate() {
                        let ox = axis_out(0, ix);
                        for (jy, iy) in bx[1].clone().enumerate() {
                            let oxy = ox || axis_out(1, iy);
                            let e0 = (jx * ny + jy) * nz;
                            let rows = e0..e0 + nz;
                            let (s_row, l_row) = (&mut sc.s[rows.clone()], &mut sc.l[rows.clone()]);
                            let (a_row, b_row) = (&sc.ia[rows.clone()], &sc.ib[rows]);
                            for jz in 0..nz {
                                let term = wk * a_row[jz] * b_row[jz];
                                if oxy || oz[jz] {
                                    l_row[jz] += term.abs();
                                    if mode == OutOfGrid::Drop {
                                        continue;
                                    }
                                }
                                s_row[jz] += term;
                            }
                        }
                    }
                }
                let off = (d[0] as isize * n as isize + d[1] as isize) * n as isize + d[2] as isize;
                for (jx, ix) in bx[0].clone().enumerate() {
                    for (jy, iy) in bx[1].clone().enumerate() {
                        let ri = (ix * n + iy) * n + bx[2].start;
                        let rj = (ri as isize - off) as usize;
                        let e0 = (jx * ny + jy) * nz;
                        let s_row = &sc.s[e0..e0 + nz];
                        let l_row = &sc.l[e0..e0 + nz];
                        let (mu_i, mu_j) = (&mu[ri..ri + nz], &mu[rj..rj + nz]);
                        for t in 0..nt {
                            let wt = w[t];
                            if wt == 0.0 {
                                continue;
                            }
                            scatter(&mut sums[t][ri..ri + nz], s_row, mu_j, wt);
                            scatter(&mut sums[t][rj..rj + nz], s_row, mu_i, wt);
                            if any_leak {
                                scatter(&mut leak[t][ri..ri + nz], l_row, mu_j, wt);
                                scatter(&mut leak[t][rj..rj + nz], l_row, mu_i, wt);
                            }
                        }
                    }
                }
            }
            (sums, leak)
        })
        .collect();

    let (s_parts, l_parts): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    let mut sums = sum_chunks(s_parts, nt, len);
    let leak = sum_chunks(l_parts, nt, len);
    for (t, tab) in tables.iter().enumerate() {
        let w0 = tab.self_weight();
        for (i, s) in sums[t].iter_mut().enumerate() {
            *s += w0 * mu[i] * value(a, i) * value(b, i);
        }
    }
    GainSums { sums, leak }
}

/// Discrete convolution Σ_j W(i − j) g_j per weight table, self cell included.
pub(crate) fn convolve(grid: &VelocityGrid, tables: &[&OffsetWeights], g: &[f64]) -> Vec<Vec<f64>> {
    let n = grid.n_per_dim();
    let len = grid.len();
    let nt = tables.len();
    let support = union_support(tables);
    let parts: Vec<Vec<Vec<f64>>> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![vec![0.0; len]; nt];
            for d in chunk_of(&support, c) {
                let off = (d[0] as isize * n as isize + d[1] as isize) * n as isize + d[2] as isize;
                for (t, tab) in tables.iter().enumerate() {
                    let wt = tab.get(d);
                    if wt == 0.0 {
                        continue;
                    }
                    let out = &mut acc[t];
                    for ix in valid_range(n, d[0]) {
                        for iy in valid_range(n, d[1]) {
                            let zr = valid_range(n, d[2]);
                            let row = (ix * n + iy) * n;
                            for iz in zr {
                                let i = row + iz;
                                let j = (i as isize - off) as usize;
                                out[i] += wt * g[j];
                                out[j] += wt * g[i];
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = sum_chunks(parts, nt, len);
    for (t, tab) in tables.iter().enumerate() {
        let w0 = tab.self_weight();
        for (o, gi) in out[t].iter_mut().zip(g) {
            *o += w0 * gi;
        }
    }
    out
}
