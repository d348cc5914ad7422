use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use serde::{Deserialize, Serialize};

use super::record::TimeSeriesRecord;
use crate::error::{Error, Result};

pub const DEFAULT_FIT_WINDOW: f64 = 0.2;
pub const MIN_FIT_ROWS: usize = 20;
const P_MIN: f64 = 0.02;
const P_MAX: f64 = 3.0;
const SCAN_POINTS: usize = 64;

/// ln y = a − λ tᵖ at fixed p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub amplitude: f64,
    pub lambda: f64,
    pub p: f64,
    /// Coefficient of determination on ln y.
    pub r_squared: f64,
}

/// Free fit of (a, λ, ρ) and the fit with the exponent held at the hint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda: f64,
    pub rho_est: f64,
    pub fit_quality: f64,
    pub amplitude: f64,
    pub constrained: PowerFit,
    /// First row index used.
    pub window_start: usize,
}

struct Series {
    t: Vec<f64>,
    y: Vec<f64>,
}

impl Series {
    fn linear_fit(&self, p: f64) -> PowerFit {
        let n = self.t.len() as f64;
        let x: Vec<f64> = self.t.iter().map(|t| t.powf(p)).collect();
        let mx = x.iter().sum::<f64>() / n;
        let my = self.y.iter().sum::<f64>() / n;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for (xi, yi) in x.iter().zip(&self.y) {
            sxx += (xi - mx) * (xi - mx);
            sxy += (xi - mx) * (yi - my);
            syy += (yi - my) * (yi - my);
        }
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let a = my - slope * mx;
        let sse: f64 = x
            .iter()
            .zip(&self.y)
            .map(|(xi, yi)| {
                let r = yi - (a + slope * xi);
                r * r
            })
            .sum();
        let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 0.0 };
        PowerFit {
            amplitude: a,
            lambda: -slope,
            p,
            r_squared,
        }
    }

    fn sse(&self, p: f64) -> f64 {
        let f = self.linear_fit(p);
        self.t
            .iter()
            .zip(&self.y)
            .map(|(t, y)| {
                let r = y - (f.amplitude - f.lambda * t.powf(p));
                r * r
            })
            .sum()
    }
}

impl CostFunction for &Series {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.sse(*p))
    }
}

fn window(record: &TimeSeriesRecord, skip_fraction: f64) -> Result<(Series, usize)> {
    let n = record.len();
    if n < MIN_FIT_ROWS {
        return Err(Error::FitDegenerate(format!(
            "{n} rows; at least {MIN_FIT_ROWS} required"
        )));
    }
    if !(0.0..1.0).contains(&skip_fraction) {
        return Err(Error::InvalidParameter {
            name: "fit.window",
            value: skip_fraction,
            condition: "0 ≤ window < 1",
        });
    }
    let start = (skip_fraction * n as f64).floor() as usize;
    let mut t = Vec::with_capacity(n - start);
    let mut y = Vec::with_capacity(n - start);
    for r in &record.rows[start..] {
        if !(r.h_sup > 0.0 && r.h_sup.is_finite()) {
            return Err(Error::FitDegenerate(format!(
                "non-positive sup-norm {} at t = {}",
                r.h_sup, r.t
            )));
        }
        t.push(r.t);
        y.push(r.h_sup.ln());
    }
    if t.len() < 3 {
        return Err(Error::FitDegenerate("fit window holds fewer than 3 rows".into()));
    }
    Ok((Series { t, y }, start))
}

/// Least squares of ln h_sup = a − λ tᵖ over the rows after the leading
/// `skip_fraction`; p is searched in [0.02, 3] by a log-spaced scan then
/// Brent refinement. The fit at p = `rho_hint` is returned alongside.
pub fn decay_fit_window(
    record: &TimeSeriesRecord,
    rho_hint: f64,
    skip_fraction: f64,
) -> Result<DecayFit> {
    if !(rho_hint > 0.0 && rho_hint.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "fit.rho_hint",
            value: rho_hint,
            condition: "ρ > 0",
        });
    }
    let (series, start) = window(record, skip_fraction)?;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|k| P_MIN * (P_MAX / P_MIN).powf(k as f64 / (SCAN_POINTS - 1) as f64))
        .collect();
    let costs: Vec<f64> = grid.iter().map(|&p| series.sse(p)).collect();
    let best = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(SCAN_POINTS - 1)];
    let solver = BrentOpt::new(lo, hi).set_tolerance(1e-10, 1e-14);
    let p = Executor::new(&series, solver)
        .configure(|s| s.max_iters(200))
        .run()
        .ok()
        .and_then(|res| res.state().best_param)
        .filter(|p| p.is_finite())
        .unwrap_or(grid[best]);
    let p = if series.sse(p) <= costs[best] { p } else { grid[best] };
    let free = series.linear_fit(p);
    if !(free.lambda > 0.0) {
        return Err(Error::FitDegenerate(format!(
            "no decay in window (λ = {:.3e})",
            free.lambda
        )));
    }
    Ok(DecayFit {
        lambda: free.lambda,
        rho_est: p,
        fit_quality: free.r_squared,
        amplitude: free.amplitude,
        constrained: series.linear_fit(rho_hint),
        window_start: start,
    })
}

/// `decay_fit_window` with the leading 20% of rows discarded.
pub fn decay_fit(record: &TimeSeriesRecord, rho_hint: f64) -> Result<DecayFit> {
    decay_fit_window(record, rho_hint, DEFAULT_FIT_WINDOW)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> TimeSeriesRecord {
        let t: Vec<f64> = (0..200).map(|k| 0.1 * k as f64).collect();
        let h: Vec<f64> = t.iter().map(|&t| f(t)).collect();
        TimeSeriesRecord::synthetic(&t, &h)
    }

    #[test]
    fn recovers_stretched_exponential() {
        let rec = synthetic(|t| 3.0 * (-0.7 * t.sqrt()).exp());
        let fit = decay_fit(&rec, 0.5).unwrap();
        assert!((fit.lambda - 0.7).abs() < 1e-6, "{fit:?}");
        assert!((fit.rho_est - 0.5).abs() < 1e-6, "{fit:?}");
        assert!((fit.amplitude - 3f64.ln()).abs() < 1e-6);
        assert!(fit.fit_quality > 1.0 - 1e-12);
        assert_eq!(fit.window_start, 40);
    }

    #[test]
    fn recovers_pure_exponential() {
        let rec = synthetic(|t| (-t).exp());
        let fit = decay_fit(&rec, 1.0 / 3.0).unwrap();
        assert!((fit.rho_est - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.lambda - 1.0).abs() < 1e-6);
        assert!(fit.constrained.r_squared < fit.fit_quality);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(decay_fit(&synthetic(|_| 1.0), 0.5), Err(Error::FitDegenerate(_))));
        assert!(matches!(decay_fit(&synthetic(|t| 1.0 + t), 0.5), Err(Error::FitDegenerate(_))));
        assert!(matches!(decay_fit(&synthetic(|t| 1.0 - t), 0.5), Err(Error::FitDegenerate(_))));
        let short = TimeSeriesRecord::synthetic(&[0.0, 1.0, 2.0], &[1.0, 0.5, 0.25]);
        assert!(matches!(decay_fit(&short, 0.5), Err(Error::FitDegenerate(_))));
    }
}
