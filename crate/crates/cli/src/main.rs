//! `sideband`: side-band inequivalence from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use commands::{Ctx, FitArgs};
use config::RunConfig;
use error::{CliError, EXIT_VALIDATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "sideband", version, about = "Side-band inequivalence of a driven optomechanical cavity")]
struct Cli {
    /// TOML (or .json) run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Frequency units of every rate in the configuration and output.
    #[arg(long, global = true, value_enum)]
    units: Option<config::Units>,
    /// Seed for noise and bootstrap; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write results into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// δ at one operating point by every closed-form method.
    Si,
    /// δ over a grid of one parameter.
    Sweep,
    /// Photon number and size of the largest δ.
    Optimum,
    /// Linear / weakly / strongly nonlinear regime of an operating point.
    Classify,
    /// Integrate the classical equations and measure δ from the spectrum.
    Simulate,
    /// Fit Lorentzians to a spectrum and read off δ.
    Fit(FitArgs),
    /// Write a synthetic side-band spectrum.
    Synth,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let units = cli
        .units
        .or(cfg.units)
        .ok_or_else(|| CliError::validation("units not set: pass --units hz|rad or set `units` in the config"))?;
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::validation("--workers must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::computation(format!("thread pool: {e}")))?;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.as_ref()).map(PathBuf::from));
    let ctx = Ctx {
        units,
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        format: cli.format.or(cfg.output.as_ref().and_then(|o| o.format)),
        cfg,
    };
    if matches!(cli.command, Command::Simulate) && out.is_none() {
        return Err(CliError::validation("simulate writes several files; give --out DIR"));
    }
    let outcome = match &cli.command {
        Command::Si => commands::si(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Optimum => commands::optimum(&ctx),
        Command::Classify => commands::classify(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Synth => commands::synth(&ctx),
    }?;
    output::emit(&outcome, out.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sideband: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
