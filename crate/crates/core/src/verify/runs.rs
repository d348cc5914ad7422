use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use super::{Certificate, Tally, Verdict};
use crate::dynamics::{decay_fit, picard_contraction_ratios, InitialData, TimeSeriesRecord};
use crate::error::{Error, Result};
use crate::kernel::{CollisionQuadrature, ModelParams, OutOfGrid, SphereRule, VelocityGrid};
use crate::weights::decay_exponent;
use crate::SpatialLayout;

/// Relative part of the per-step entropy tolerance.
pub const ENTROPY_REL_TOL: f64 = 1e-6;
/// Absolute round-off floor of the entropy sums.
pub const ENTROPY_FLOOR: f64 = 64.0 * f64::EPSILON;

/// tol_H = 1e−6 ℰ(F₀) + floor.
pub fn entropy_tolerance(e0: f64) -> f64 {
    ENTROPY_REL_TOL * e0.abs() + ENTROPY_FLOOR
}

/// Monotone ℰ along each record within tol_H per step, and the split
/// bound A + B ≤ ℰ(F(t)) ≤ ℰ(F₀) at every row.
pub fn certify_entropy(records: &[TimeSeriesRecord]) -> Certificate {
    const ID: &str = "Lemma 3.1, Lemma 3.2";
    const CLAIM: &str = "ℰ(F(t)) non-increasing; A + B ≤ ℰ(F(t)) ≤ ℰ(F₀)";
    let mut tally = Tally::default();
    let mut max_increase = f64::NEG_INFINITY;
    let mut max_split_ratio = 0.0f64;
    for rec in records {
        let Some(first) = rec.rows.first() else { continue };
        let e0 = first.rel_entropy;
        let tol = entropy_tolerance(e0);
        for pair in rec.rows.windows(2) {
            let inc = pair[1].rel_entropy - pair[0].rel_entropy;
            max_increase = max_increase.max(inc);
            tally.upper(inc, tol);
        }
        for row in &rec.rows {
            let split = row.split_a + row.split_b;
            if row.rel_entropy > 0.0 {
                max_split_ratio = max_split_ratio.max(split / row.rel_entropy);
            }
            tally.upper(split, row.rel_entropy.max(0.0) + f64::MIN_POSITIVE);
            tally.upper(split, e0.max(0.0) + f64::MIN_POSITIVE);
        }
    }
    if tally.total == 0 {
        return Certificate::degenerate(ID, CLAIM, "no rows");
    }
    let mut cert = Certificate::new(ID, CLAIM)
        .constant("max_step_increase", max_increase)
        .constant("max_split_over_entropy", max_split_ratio)
        .with_info("runs", records.len() as f64);
    cert.train_size = 0;
    cert.finish(tally)
}

/// Negative control: the record with ℰ at the middle row set to the
/// previous row's value plus 10 tol_H + 10% of ℰ(F₀).
pub fn adversarial_fixture(record: &TimeSeriesRecord) -> TimeSeriesRecord {
    let mut out = record.clone();
    if out.rows.len() >= 2 {
        let k = out.rows.len() / 2;
        let e0 = out.rows[0].rel_entropy;
        out.rows[k].rel_entropy = out.rows[k - 1].rel_entropy + 10.0 * entropy_tolerance(e0) + 0.1 * e0.abs();
    }
    out
}

/// Decay-exponent check on a run: free-fit ρ_est ≥ 0.8 ρ and R² ≥ 0.95.
/// Faster decay passes with an over-decay flag.
pub fn certify_decay(record: &TimeSeriesRecord, gamma: f64, vartheta: f64) -> Result<Certificate> {
    const ID: &str = "Theorem 1.1 (decay exponent)";
    const CLAIM: &str = "‖h(t)‖∞ ≲ e^{−λ t^ρ}, ρ = 1 + (1+ϑ)γ/(2−γ)";
    let rho = decay_exponent(gamma, vartheta)?;
    let mut cert = Certificate::new(ID, CLAIM).with_info("rho_theory", rho);
    if vartheta == 0.0 {
        cert.flags.push("no added coercivity (ϑ = 0)".into());
    }
    if record.unstable {
        cert.flags.push("run aborted as unstable".into());
    }
    let fit = match decay_fit(record, rho) {
        Ok(f) => f,
        Err(Error::FitDegenerate(msg)) => {
            cert.flags.push(format!("fit degenerate: {msg}"));
            cert.holdout_size = 1;
            cert.worst_violation = f64::INFINITY;
            cert.verdict = Verdict::Fail;
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    let tail = &record.rows[fit.window_start..];
    let monotone = tail.windows(2).all(|w| w[1].h_sup <= w[0].h_sup);
    cert = cert
        .constant("lambda", fit.lambda)
        .constant("rho_est", fit.rho_est)
        .constant("r_squared", fit.fit_quality)
        .constant("lambda_at_rho_theory", fit.constrained.lambda)
        .constant("r_squared_at_rho_theory", fit.constrained.r_squared)
        .with_info("monotone_after_transient", if monotone { 1.0 } else { 0.0 })
        .with_info("window_start", fit.window_start as f64);
    if fit.rho_est > 1.2 * rho {
        cert.flags.push("over-decay: ρ_est above the theoretical exponent".into());
    }
    cert.train_size = tail.len();
    let mut tally = Tally::default();
    tally.lower(fit.rho_est, 0.8 * rho);
    tally.lower(fit.fit_quality, 0.95);
    Ok(cert.finish(tally))
}

/// Empirical dt threshold of the frozen-time iteration and the ratios seen.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardCalibration {
    /// One rung below the largest ladder dt with every training ratio ≤ ½
    /// at it and below.
    pub dt_threshold: f64,
    pub ladder: Vec<f64>,
    /// Largest ratio over the training fields, per ladder dt.
    pub train_max: Vec<f64>,
}

pub const PICARD_LADDER: [f64; 8] = [2.0, 1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];
const PICARD_SWEEPS: usize = 4;

fn random_field(grid: &Arc<VelocityGrid>, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let init = InitialData::Bump {
        amplitude: rng.gen_range(0.1..0.9),
        mode: rng.gen_range(1..=3),
    };
    Ok(init.build(grid.clone(), SpatialLayout::Homogeneous, rng.gen())?.field.into_values())
}

fn max_ratio(quad: &CollisionQuadrature, f: &[f64], dt: f64) -> Result<f64> {
    let ratios = picard_contraction_ratios(quad, f, dt, PICARD_SWEEPS)?;
    Ok(ratios.into_iter().filter(|r| r.is_finite()).fold(0.0, f64::max))
}

/// Frozen-time contraction: the dt threshold is calibrated on `n_train`
/// random fields over a halving ladder, then `n_holdout` further fields
/// must contract with ratio ≤ ½ at every ladder dt up to the threshold.
pub fn certify_picard(
    grid: &VelocityGrid,
    params: &ModelParams,
    rule: SphereRule,
    n_train: usize,
    n_holdout: usize,
    seed: u64,
) -> Result<(Certificate, PicardCalibration)> {
    const ID: &str = "Appendix A (frozen-time iteration)";
    const CLAIM: &str = "‖Fⁿ⁺¹ − Fⁿ‖∞ ≤ ½‖Fⁿ − Fⁿ⁻¹‖∞ for dt below a threshold";
    let quad = CollisionQuadrature::new(grid, params, rule, OutOfGrid::Clamp)?;
    let g = Arc::new(grid.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train: Vec<Vec<f64>> = (0..n_train).map(|_| random_field(&g, &mut rng)).collect::<Result<_>>()?;
    let hold: Vec<Vec<f64>> = (0..n_holdout).map(|_| random_field(&g, &mut rng)).collect::<Result<_>>()?;
    let ladder = PICARD_LADDER.to_vec();
    let mut train_max = Vec::with_capacity(ladder.len());
    for &dt in &ladder {
        let mut m = 0.0f64;
        for f in &train {
            m = m.max(max_ratio(&quad, f, dt)?);
        }
        train_max.push(m);
    }
    // largest dt whose ratio and all smaller-dt ratios are ≤ ½, then one
    // rung lower as a safety margin when the ladder has one
    let mut edge = None;
    for k in (0..ladder.len()).rev() {
        if train_max[k] <= 0.5 {
            edge = Some(k);
        } else {
            break;
        }
    }
    let threshold = edge.map_or(f64::NAN, |k| ladder[(k + 1).min(ladder.len() - 1)]);
    let calib = PicardCalibration {
        dt_threshold: threshold,
        ladder: ladder.clone(),
        train_max: train_max.clone(),
    };
    if threshold.is_nan() || n_train == 0 {
        return Ok((Certificate::degenerate(ID, CLAIM, "no ladder dt contracts"), calib));
    }
    let mut tally = Tally::default();
    let mut hold_max = 0.0f64;
    for &dt in ladder.iter().filter(|&&dt| dt <= threshold) {
        for f in &hold {
            let r = max_ratio(&quad, f, dt)?;
            hold_max = hold_max.max(r);
            tally.upper(r, 0.5);
        }
    }
    let mut cert = Certificate::new(ID, CLAIM)
        .constant("dt_threshold", threshold)
        .constant("train_max_ratio_at_threshold", train_max[ladder.iter().position(|&d| d == threshold).unwrap()])
        .with_info("holdout_max_ratio", hold_max);
    for (dt, m) in ladder.iter().zip(&train_max) {
        cert = cert.with_info(&format!("train_max[dt={dt}]"), *m);
    }
    cert.train_size = n_train * ladder.len();
    Ok((cert.finish(tally), calib))
}
