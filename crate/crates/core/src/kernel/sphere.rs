use serde::{Deserialize, Serialize};

use super::Vec3;

/// Symmetric quadrature rules on the unit sphere (Lebedev family), with
/// weights normalized to sum to one. Every rule is closed under σ ↦ −σ,
/// which the collision quadrature relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SphereRule {
    /// 6 points, exact through degree 3.
    #[serde(rename = "lebedev-6")]
    Lebedev6,
    /// 14 points, exact through degree 5.
    #[default]
    #[serde(rename = "lebedev-14")]
    Lebedev14,
    /// 26 points, exact through degree 7.
    #[serde(rename = "lebedev-26")]
    Lebedev26,
    /// 38 points, exact through degree 9.
    #[serde(rename = "lebedev-38")]
    Lebedev38,
}

/// Expanded rule: directions, weights and the index of each antipode.
#[derive(Debug, Clone)]
pub struct SpherePoints {
    pub dirs: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub antipode: Vec<usize>,
}

impl SphereRule {
    pub fn degree(&self) -> usize {
        match self {
            SphereRule::Lebedev6 => 3,
            SphereRule::Lebedev14 => 5,
            SphereRule::Lebedev26 => 7,
            SphereRule::Lebedev38 => 9,
        }
    }

    pub fn expand(&self) -> SpherePoints {
        let mut dirs = Vec::new();
        let mut weights = Vec::new();
        let mut push = |set: Vec<Vec3>, w: f64| {
            for d in set {
                dirs.push(d);
                weights.push(w);
            }
        };
        match self {
            SphereRule::Lebedev6 => push(octahedron(), 1.0 / 6.0),
            SphereRule::Lebedev14 => {
                push(octahedron(), 1.0 / 15.0);
                push(cube(), 3.0 / 40.0);
            }
            SphereRule::Lebedev26 => {
                push(octahedron(), 1.0 / 21.0);
                push(cube(), 9.0 / 280.0);
                push(edges(), 4.0 / 105.0);
            }
            SphereRule::Lebedev38 => {
                push(octahedron(), 1.0 / 105.0);
                push(cube(), 9.0 / 280.0);
                push(
                    planar_pairs(0.459_700_843_380_983_1, 0.888_073_833_977_115_3),
                    1.0 / 35.0,
                );
            }
        }
        let antipode = dirs
            .iter()
            .map(|d| {
                dirs.iter()
                    .position(|e| (0..3).all(|c| (d[c] + e[c]).abs() < 1e-14))
                    .expect("sphere rule is inversion symmetric")
            })
            .collect();
        SpherePoints {
            dirs,
            weights,
            antipode,
        }
    }
}

fn octahedron() -> Vec<Vec3> {
    let mut out = Vec::new();
    for axis in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[axis] = s;
            out.push(v);
        }
    }
    out
}

fn cube() -> Vec<Vec3> {
    let a = 1.0 / 3f64.sqrt();
    let mut out = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                out.push([sx * a, sy * a, sz * a]);
            }
        }
    }
    out
}

fn edges() -> Vec<Vec3> {
    planar_pairs(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
}

/// All points with one zero coordinate and the other two equal to ±p, ±q
/// in either order (12 points when p = q, 24 otherwise).
fn planar_pairs(p: f64, q: f64) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for zero in 0..3 {
        let (a, b) = ((zero + 1) % 3, (zero + 2) % 3);
        for (x, y) in [(p, q), (q, p)] {
            for sx in [1.0, -1.0] {
                for sy in [1.0, -1.0] {
                    let mut v = [0.0; 3];
                    v[a] = sx * x;
                    v[b] = sy * y;
                    if !out
                        .iter()
                        .any(|e| (0..3).all(|c| (e[c] - v[c]).abs() < 1e-15))
                    {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact mean of x^a y^b z^c over the unit sphere (all even exponents):
    /// (a−1)!!(b−1)!!(c−1)!! / (a+b+c+1)!!
    fn sphere_monomial_mean(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        let dfact = |n: i64| -> f64 {
            let mut acc = 1.0;
            let mut k = n;
            while k > 1 {
                acc *= k as f64;
                k -= 2;
            }
            acc
        };
        dfact(a as i64 - 1) * dfact(b as i64 - 1) * dfact(c as i64 - 1)
            / dfact((a + b + c) as i64 + 1)
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        for rule in [
            SphereRule::Lebedev6,
            SphereRule::Lebedev14,
            SphereRule::Lebedev26,
            SphereRule::Lebedev38,
        ] {
            let pts = rule.expand();
            let wsum: f64 = pts.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14, "{rule:?}");
            for d in &pts.dirs {
                assert!((super::super::norm(d) - 1.0).abs() < 1e-14);
            }
            let deg = rule.degree() as u32;
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    for c in 0..=(deg - a - b) {
                        let q: f64 = pts
                            .dirs
                            .iter()
                            .zip(&pts.weights)
                            .map(|(d, w)| {
                                w * d[0].powi(a as i32) * d[1].powi(b as i32) * d[2].powi(c as i32)
                            })
                            .sum();
                        let exact = sphere_monomial_mean(a, b, c);
                        assert!(
                            (q - exact).abs() < 1e-13,
                            "{rule:?} x^{a} y^{b} z^{c}: {q} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn point_counts_and_antipodes() {
        let counts = [
            (SphereRule::Lebedev6, 6),
            (SphereRule::Lebedev14, 14),
            (SphereRule::Lebedev26, 26),
            (SphereRule::Lebedev38, 38),
        ];
        for (rule, n) in counts {
            let pts = rule.expand();
            assert_eq!(pts.dirs.len(), n);
            for (k, &j) in pts.antipode.iter().enumerate() {
                assert_eq!(pts.antipode[j], k);
                assert_eq!(pts.weights[j], pts.weights[k]);
            }
        }
    }
}
