//! Static SVG plots of a run.

use plotters::prelude::*;
use softbte_core::dynamics::{DecayFit, TimeSeriesRecord};

const SIZE: (u32, u32) = (720, 480);

type PlotResult = Result<String, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(lo, hi): (f64, f64)| (lo.min(v), hi.max(v)))))
}

fn pad_log(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo / 2.0, hi * 2.0)
    } else {
        (lo / 10.0, lo * 10.0)
    }
}

fn pad_lin(lo: f64, hi: f64) -> (f64, f64) {
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn time_range(record: &TimeSeriesRecord) -> (f64, f64) {
    let t_end = record.rows.last().map_or(1.0, |r| r.t);
    (0.0, if t_end > 0.0 { t_end } else { 1.0 })
}

fn caption(title: &str, stamp: Option<&str>) -> String {
    match stamp {
        Some(s) => format!("{title} ({s})"),
        None => title.to_string(),
    }
}

fn positive_h(record: &TimeSeriesRecord) -> Vec<(f64, f64)> {
    record
        .rows
        .iter()
        .filter(|r| r.h_sup > 0.0 && r.h_sup.is_finite())
        .map(|r| (r.t, r.h_sup))
        .collect()
}

/// sup|h| against t on a log scale.
pub fn norm_plot(record: &TimeSeriesRecord, stamp: Option<&str>) -> PlotResult {
    let pts = positive_h(record);
    let (lo, hi) = bounds(pts.iter().map(|p| p.1)).map_or((1e-16, 1.0), |(l, h)| pad_log(l, h));
    let (t0, t1) = time_range(record);
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(caption("sup |h| vs t", stamp), ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d(t0..t1, (lo..hi).log_scale())
            .map_err(err)?;
        chart.configure_mesh().x_desc("t").y_desc("sup |h|").draw().map_err(err)?;
        chart.draw_series(LineSeries::new(pts, &BLUE)).map_err(err)?;
        root.present().map_err(err)?;
    }
    Ok(svg)
}

/// Relative entropy against t.
pub fn entropy_plot(record: &TimeSeriesRecord, stamp: Option<&str>) -> PlotResult {
    let pts: Vec<(f64, f64)> = record
        .rows
        .iter()
        .filter(|r| r.rel_entropy.is_finite())
        .map(|r| (r.t, r.rel_entropy))
        .collect();
    let (lo, hi) = bounds(pts.iter().map(|p| p.1)).map_or((0.0, 1.0), |(l, h)| pad_lin(l, h));
    let (t0, t1) = time_range(record);
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(caption("relative entropy vs t", stamp), ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(90)
            .build_cartesian_2d(t0..t1, lo..hi)
            .map_err(err)?;
        chart.configure_mesh().x_desc("t").y_desc("relative entropy").draw().map_err(err)?;
        chart.draw_series(LineSeries::new(pts, &RED)).map_err(err)?;
        root.present().map_err(err)?;
    }
    Ok(svg)
}

/// sup|h| with the free fit and the fit at the theoretical exponent.
pub fn fit_plot(record: &TimeSeriesRecord, fit: Option<&DecayFit>, stamp: Option<&str>) -> PlotResult {
    let pts = positive_h(record);
    let (lo, hi) = bounds(pts.iter().map(|p| p.1)).map_or((1e-16, 1.0), |(l, h)| pad_log(l, h));
    let (t0, t1) = time_range(record);
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(caption("decay fit ln sup|h| = a - λ t^ρ", stamp), ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d(t0..t1, (lo..hi).log_scale())
            .map_err(err)?;
        chart.configure_mesh().x_desc("t").y_desc("sup |h|").draw().map_err(err)?;
        chart
            .draw_series(LineSeries::new(pts, &BLACK))
            .map_err(err)?
            .label("measured")
            .legend(|(x, y)| PathElement::new([(x, y), (x + 18, y)], BLACK));
        if let Some(fit) = fit {
            let times: Vec<f64> = record.rows[fit.window_start..].iter().map(|r| r.t).collect();
            let curve = |a: f64, lambda: f64, p: f64| -> Vec<(f64, f64)> {
                times
                    .iter()
                    .map(|&t| (t, (a - lambda * t.powf(p)).exp()))
                    .filter(|&(_, y)| y > lo && y < hi)
                    .collect()
            };
            chart
                .draw_series(LineSeries::new(curve(fit.amplitude, fit.lambda, fit.rho_est), &BLUE))
                .map_err(err)?
                .label(format!("free fit ρ = {:.3}", fit.rho_est))
                .legend(|(x, y)| PathElement::new([(x, y), (x + 18, y)], BLUE));
            let c = fit.constrained;
            chart
                .draw_series(LineSeries::new(curve(c.amplitude, c.lambda, c.p), &RED))
                .map_err(err)?
                .label(format!("ρ = {:.3} fixed", c.p))
                .legend(|(x, y)| PathElement::new([(x, y), (x + 18, y)], RED));
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(err)?;
        }
        root.present().map_err(err)?;
    }
    Ok(svg)
}
