//! `kerr-twin`: experiment runner for the two-mode Kerr model.
//!
//! Every subcommand reads a JSON run configuration (`--config`), applies
//! `--set key=value` overrides, and writes deterministic data files into
//! `--out`. Exit codes: 0 success, 1 validation, 2 numerical, 3 resource.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;
mod output;

use config::RunConfig;
use output::OutDir;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Resource(String),
}

impl From<kerr_core::Error> for CliError {
    fn from(e: kerr_core::Error) -> Self {
        match e {
            kerr_core::Error::InvalidInput(_) => CliError::Validation(e.to_string()),
            kerr_core::Error::Numerical { .. } => CliError::Numerical(e.to_string()),
            kerr_core::Error::Resource { .. } => CliError::Resource(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "kerr-twin",
    about = "Closed-form dynamics and diagnostics for two Kerr-coupled modes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config field, e.g. --set model.lambda=0.25. Flags win
    /// over file values; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for data files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the evolved state and record fidelity and occupations.
    Evolve(RunArgs),
    /// Entropy series (linear and Von Neumann) over a time sweep.
    Entropy(RunArgs),
    /// Quadrature means, envelope and spreads over a time sweep.
    Quadratures(RunArgs),
    /// Husimi distribution frames at listed instants.
    Qfunc(RunArgs),
    /// Characteristic-time report and recurrence verdicts.
    Timescales(RunArgs),
    /// Cat-mixture decompositions at rational fractions of the
    /// re-coherence time.
    Catmix(RunArgs),
    /// Differential suite: closed forms against the brute-force
    /// propagator.
    OracleCheck(RunArgs),
}

fn init_worker_pool() {
    if let Ok(v) = std::env::var("KERR_TWIN_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                // ignore failure when a pool already exists (tests)
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    init_worker_pool();
    let (args, runner): (&RunArgs, fn(&RunConfig, &OutDir) -> Result<(), CliError>) =
        match &cli.command {
            Command::Evolve(a) => (a, commands::evolve),
            Command::Entropy(a) => (a, commands::entropy),
            Command::Quadratures(a) => (a, commands::quadratures),
            Command::Qfunc(a) => (a, commands::qfunc),
            Command::Timescales(a) => (a, commands::timescales),
            Command::Catmix(a) => (a, commands::catmix),
            Command::OracleCheck(a) => (a, commands::oracle_check),
        };
    let config = RunConfig::load(&args.config, &args.set)?;
    let out = OutDir::create(&args.out)?;
    runner(&config, &out)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
