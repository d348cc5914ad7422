//! `softbte` command-line driver.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use softbte_core::config::RunConfig;

use commands::{Failure, Outcome};

/// Soft-potential Boltzmann solver and bound certificates.
#[derive(Debug, Parser)]
#[command(name = "softbte", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file: flat `dotted.key = value` lines or JSON.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Certificate suite for `verify`.
    #[arg(long, global = true, value_name = "NAME", default_value = "all")]
    suite: String,
    /// Seed (overrides `seed`).
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Leave generation timestamps out of JSON and SVG outputs.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write CSV, JSON and SVG outputs.
    Simulate,
    /// Run certificate suites and write a JSON report.
    Verify,
    /// Run the (γ, ϑ) sweep and write a CSV of fitted exponents.
    Sweep,
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.no_timestamp {
        cfg.output.timestamp = false;
    }
    cfg.validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok(cfg)
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("SOFTBTE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::config(format!("SOFTBTE_THREADS must be a positive integer, got \"{v}\""))),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Outcome {
    let cfg = load(cli)?;
    if let Some(n) = threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate => commands::simulate_cmd(&cfg),
        Command::Verify => commands::verify_cmd(&cfg, &cli.suite),
        Command::Sweep => commands::sweep_cmd(&cfg),
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1, not clap's 2, which means instability here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status as u8)
        }
    }
}
