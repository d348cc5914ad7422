//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails. Numeric arguments select criteria.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softbte_core::collision::collision_operator;
use softbte_core::dynamics::{decay_fit, simulate, InitialData, SimulationConfig, StepOptions, TimeSeriesRecord};
use softbte_core::kernel::{collision_frequency, norm, GridSpec, Vec3};
use softbte_core::verify::{
    adversarial_fixture, certify_entropy, certify_gamma_bounds, certify_klowcut_scaling, certify_nu_bounds,
    certify_picard, Certificate, NuSweep, Verdict, DEFAULT_SLACK,
};
use softbte_core::weights::semigroup_g;
use softbte_core::{CollisionQuadrature, ModelParams, OutOfGrid, SphereRule, VelocityGrid, WeightParams};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sup(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, x| m.max(x.abs()))
}

fn model(gamma: f64) -> ModelParams {
    ModelParams::new(gamma, 0.1).unwrap()
}

fn weights() -> WeightParams {
    WeightParams::new(0.5, 1.0, 3.5, -1.0).unwrap()
}

fn verdict(c: &Certificate) -> String {
    format!("{} {:?} pass_fraction={:.4} worst={:.3e}", c.lemma_id, c.verdict, c.pass_fraction, c.worst_violation)
}

// Continuum ν at every node: the oracle for the discrete identities.
fn continuum_nu(grid: &VelocityGrid, p: &ModelParams) -> Vec<f64> {
    grid.nodes().map(|v| collision_frequency(&v, p).unwrap()).collect()
}

fn equilibrium_fidelity() -> Outcome {
    let start = Instant::now();
    let grid = VelocityGrid::new(8.0, 24).unwrap();
    let p = model(-1.0);
    let quad = CollisionQuadrature::new(&grid, &p, SphereRule::default(), OutOfGrid::Clamp).unwrap();
    let nu = continuum_nu(&grid, &p);
    let (mu, sm) = (grid.mu(), grid.sqrt_mu());
    let nodes: Vec<Vec3> = grid.nodes().collect();

    let sup_nu_mu = sup(nu.iter().zip(mu).map(|(n, m)| n * m));
    let q = collision_operator(&quad, mu).unwrap();
    let q_res = sup(q.values.iter().copied()) / sup_nu_mu;
    let gain = quad.q_gain(mu, mu).unwrap();
    let gain_res = sup(gain.values.iter().zip(&nu).zip(mu).map(|((g, n), m)| g - n * m)) / sup_nu_mu;

    // L f = ν f − K f with the continuum ν
    let l_residual = |f: &[f64]| {
        let k = quad.apply_k(f).unwrap();
        let lf = sup(k.values.iter().zip(&nu).zip(f).map(|((k, n), x)| n * x - k));
        lf / sup(nu.iter().zip(f).map(|(n, x)| n * x))
    };
    let l0 = l_residual(sm);
    let f1: Vec<f64> = nodes.iter().zip(sm).map(|(v, s)| v[0] * s).collect();
    let l1 = l_residual(&f1);
    let elapsed = start.elapsed();
    check(
        q_res <= 0.02 && gain_res <= 0.02 && l0 <= 0.03 && l1 <= 0.05 && elapsed <= Duration::from_secs(120),
        format!(
            "Q(μ,μ)={q_res:.2e} Q⁺(μ,μ)−νμ={gain_res:.2e} (≤2%) L√μ={l0:.2e} (≤3%) L(v₁√μ)={l1:.2e} (≤5%) time={:.1}s (≤120s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn k2_identity() -> Outcome {
    let grid = VelocityGrid::new(8.0, 24).unwrap();
    let p = model(-1.0);
    let quad = CollisionQuadrature::new(&grid, &p, SphereRule::default(), OutOfGrid::Clamp).unwrap();
    let nu = continuum_nu(&grid, &p);
    let sm = grid.sqrt_mu();
    let k2 = quad.apply_k2(sm).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, v) in grid.nodes().enumerate() {
        if norm(&v) <= 4.0 {
            let target = 2.0 * nu[i] * sm[i];
            worst = worst.max((k2.values[i] - target).abs() / target);
            count += 1;
        }
    }
    check(worst <= 0.03, format!("max relative error {worst:.3e} on {count} nodes with |v| ≤ 4 (≤3%)"))
}

fn conservation() -> Outcome {
    let cfg = SimulationConfig {
        grid: GridSpec { radius: 5.0, n: 8 },
        init: InitialData::Bump { amplitude: 0.5, mode: 2 },
        dt: 0.05,
        t_end: 50.0,
        step: StepOptions {
            conservation_project: true,
            ..StepOptions::default()
        },
        seed: 7,
        ..SimulationConfig::default()
    };
    let rec = simulate(&cfg).unwrap();
    let steps = rec.rows.len() - 1;
    let mut worst = 0.0f64;
    for pair in rec.rows.windows(2) {
        let (a, b) = (&pair[0].moments, &pair[1].moments);
        worst = worst.max((b.mass - a.mass).abs() / a.mass);
        for c in 0..3 {
            worst = worst.max((b.momentum[c] - a.momentum[c]).abs() / a.mass);
        }
        worst = worst.max((b.energy - a.energy).abs() / a.energy);
    }
    check(
        steps == 1000 && !rec.unstable && worst <= 1e-10,
        format!("{steps} steps, max per-step relative drift {worst:.3e} (≤1e−10)"),
    )
}

fn entropy_records() -> Vec<TimeSeriesRecord> {
    (0..5)
        .map(|k| {
            let cfg = SimulationConfig {
                init: InitialData::Bump { amplitude: 0.5, mode: 1 },
                t_end: 2.0,
                seed: 100 + k,
                ..SimulationConfig::default()
            };
            simulate(&cfg).unwrap()
        })
        .collect()
}

fn h_theorem(records: &[TimeSeriesRecord]) -> Outcome {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for rec in records {
        let e0 = rec.rows[0].rel_entropy;
        let tol = 1e-6 * e0 + 64.0 * f64::EPSILON;
        for pair in rec.rows.windows(2) {
            let inc = pair[1].rel_entropy - pair[0].rel_entropy;
            worst = worst.max(inc);
            if !(inc <= tol) {
                violations += 1;
            }
        }
    }
    let cert = certify_entropy(records);
    let control: Vec<TimeSeriesRecord> = records.iter().map(adversarial_fixture).collect();
    let negative = certify_entropy(&control);
    check(
        violations == 0 && cert.verdict == Verdict::Pass && negative.verdict == Verdict::Fail,
        format!(
            "{} runs, {violations} violations, max step increase {worst:.3e}; negative control {:?}",
            records.len(),
            negative.verdict
        ),
    )
}

fn split_inequality(records: &[TimeSeriesRecord]) -> Outcome {
    let mut violations = 0;
    let mut rows = 0;
    let mut ratio = 0.0f64;
    for rec in records {
        for row in &rec.rows {
            rows += 1;
            let split = row.split_a + row.split_b;
            if !(split <= row.rel_entropy) {
                violations += 1;
            }
            if row.rel_entropy > 0.0 {
                ratio = ratio.max(split / row.rel_entropy);
            }
        }
    }
    check(violations == 0, format!("{rows} rows, {violations} violations, max (A+B)/ℰ = {ratio:.4}"))
}

fn nu_bounds() -> Outcome {
    let gammas = [-0.5, -1.0, -2.0, -2.5];
    let cert = certify_nu_bounds(&gammas, &NuSweep::default()).unwrap();
    let c1_positive = gammas.iter().all(|g| cert.fitted_constants[&format!("c1[gamma={g}]")] > 0.0);
    check(cert.verdict == Verdict::Pass && c1_positive, format!("{} c1>0={c1_positive}", verdict(&cert)))
}

fn klowcut() -> Outcome {
    let start = Instant::now();
    let grid = VelocityGrid::new(8.0, 16).unwrap();
    let wp = WeightParams::new(0.5, 0.0, 3.5, -1.0).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for gamma in [-1.0, -2.0] {
        let cert = certify_klowcut_scaling(&grid, &model(gamma), &wp, &[0.4, 0.2, 0.1, 0.05], None).unwrap();
        let slope = cert.fitted_constants["slope"];
        let expected = gamma + 3.0;
        let within = ((slope - expected) / expected).abs() <= 0.15;
        ok &= within && cert.verdict == Verdict::Pass;
        detail.push(format!("γ={gamma}: slope {slope:.3} vs {expected} ({:?})", cert.verdict));
    }
    let elapsed = start.elapsed();
    ok &= elapsed <= Duration::from_secs(300);
    check(ok, format!("{}; time={:.1}s (≤300s)", detail.join(", "), elapsed.as_secs_f64()))
}

fn gamma_bounds() -> Outcome {
    let grid = VelocityGrid::new(6.0, 12).unwrap();
    let cert = certify_gamma_bounds(&grid, &model(-1.0), &weights(), 2.5, 50, 50, DEFAULT_SLACK, 0).unwrap();
    check(
        cert.verdict == Verdict::Pass && cert.pass_fraction == 1.0 && cert.holdout_size > 0,
        format!("{} at slack {DEFAULT_SLACK}", verdict(&cert)),
    )
}

// Least-squares R² of ln h against t^ρ, independent of the library fit.
fn r_squared_at(times: &[f64], h: &[f64], rho: f64) -> f64 {
    let xs: Vec<f64> = times.iter().map(|t| t.powf(rho)).collect();
    let ys: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn decay() -> Outcome {
    let start = Instant::now();
    let cfg = SimulationConfig {
        grid: GridSpec { radius: 6.0, n: 12 },
        init: InitialData::Bump { amplitude: 0.1, mode: 1 },
        dt: 0.2,
        t_end: 40.0,
        ..SimulationConfig::default()
    };
    let rec = simulate(&cfg).unwrap();
    let rho = 1.0 / 3.0;
    let fit = decay_fit(&rec, rho).unwrap();
    let tail = &rec.rows[fit.window_start..];
    let monotone = tail.windows(2).all(|w| w[1].h_sup <= w[0].h_sup);
    let times: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let h: Vec<f64> = tail.iter().map(|r| r.h_sup).collect();
    let r2_oracle = r_squared_at(&times, &h, rho);
    let r2 = fit.constrained.r_squared;
    let elapsed = start.elapsed();
    let over = if fit.rho_est > 1.2 * rho { " (over-decay flag)" } else { "" };
    check(
        !rec.unstable
            && monotone
            && r2 >= 0.95
            && (r2 - r2_oracle).abs() <= 1e-9
            && fit.rho_est >= 0.8 * rho
            && elapsed <= Duration::from_secs(600),
        format!(
            "R²(ρ=1/3)={r2:.4} (oracle {r2_oracle:.4}, ≥0.95) ρ_est={:.4} (≥{:.4}){over} monotone={monotone} from t={:.1} time={:.1}s (≤600s)",
            fit.rho_est,
            0.8 * rho,
            times[0],
            elapsed.as_secs_f64()
        ),
    )
}

fn picard() -> Outcome {
    let grid = VelocityGrid::new(5.0, 8).unwrap();
    let (cert, calib) = certify_picard(&grid, &model(-1.0), SphereRule::default(), 5, 10, 0).unwrap();
    check(
        cert.verdict == Verdict::Pass && cert.holdout_size > 0,
        format!("{}; dt threshold {}", verdict(&cert), calib.dt_threshold),
    )
}

fn semigroup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = model(-1.0);
    let mut worst = 0.0f64;
    let mut cocycle = 0.0f64;
    for _ in 0..100 {
        let vartheta = rng.gen_range(0.0..1.9);
        let wp = WeightParams::new(0.5, vartheta, 3.5, -1.0).unwrap();
        let v: Vec3 = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let a: f64 = rng.gen_range(0.0..50.0);
        let b: f64 = rng.gen_range(0.0..50.0);
        let (s, t) = (a.min(b), a.max(b));
        let nu = collision_frequency(&v, &p).unwrap();
        let v2 = v.iter().map(|x| x * x).sum::<f64>();
        let nu_tilde = |tau: f64| nu + vartheta * 0.5 * v2 / (8.0 * (1.0 + tau).powf(vartheta + 1.0));
        let integral = quadrature::double_exponential::integrate(nu_tilde, s, t, 1e-14).integral;
        let oracle = (-integral).exp();
        let g = semigroup_g(nu, &v, s, t, &wp).unwrap();
        worst = worst.max((g - oracle).abs() / oracle);
        let r = rng.gen_range(s..=t);
        let split = semigroup_g(nu, &v, r, t, &wp).unwrap() * semigroup_g(nu, &v, s, r, &wp).unwrap();
        cocycle = cocycle.max((split - g).abs() / g);
    }
    check(
        worst <= 1e-10 && cocycle <= 1e-12,
        format!("100 triples: max relative error {worst:.3e} (≤1e−10), cocycle {cocycle:.3e} (≤1e−12)"),
    )
}

fn run_cli(args: &[&str], cfg: &Path, out: &Path) {
    let o = Command::new(env!("CARGO_BIN_EXE_softbte"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(["--seed", "5", "--no-timestamp"])
        .env_remove("SOFTBTE_THREADS")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "grid.n = 8\ngrid.radius = 5\ntime.t_end = 2\n").unwrap();
    let out = dir.path().join("out");
    let files = ["timeseries.csv", "summary.json", "verify.json"];
    let mut runs = Vec::new();
    for _ in 0..2 {
        run_cli(&["simulate"], &cfg, &out);
        run_cli(&["verify", "--suite", "k1"], &cfg, &out);
        runs.push(files.map(|f| fs::read(out.join(f)).unwrap()));
    }
    let same: Vec<&str> = files.iter().zip(runs[0].iter().zip(&runs[1])).filter(|(_, (a, b))| a == b).map(|(f, _)| *f).collect();
    check(same.len() == files.len(), format!("byte-identical: {}", same.join(", ")))
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wants = |k: usize| selected.is_empty() || selected.contains(&k);
    let mut records: Option<Vec<TimeSeriesRecord>> = None;
    let mut entropy = |f: fn(&[TimeSeriesRecord]) -> Outcome| -> Outcome { f(records.get_or_insert_with(entropy_records)) };
    let mut failures = 0;
    let mut run = |k: usize, name: &str, body: &mut dyn FnMut() -> Outcome| {
        if !wants(k) {
            return;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {k:>2} {tag} {name} [{:.1}s]: {detail}", start.elapsed().as_secs_f64());
    };
    run(1, "equilibrium fidelity", &mut equilibrium_fidelity);
    run(2, "K₂√μ = 2ν√μ", &mut k2_identity);
    run(3, "conservation", &mut conservation);
    run(4, "H-theorem", &mut || entropy(h_theorem));
    run(5, "entropy split inequality", &mut || entropy(split_inequality));
    run(6, "ν bounds", &mut nu_bounds);
    run(7, "K^{1−χ} scaling", &mut klowcut);
    run(8, "Γ± bounds", &mut gamma_bounds);
    run(9, "decay exponent", &mut decay);
    run(10, "Picard contraction", &mut picard);
    run(11, "semigroup exactness", &mut semigroup);
    run(12, "determinism", &mut determinism);
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
