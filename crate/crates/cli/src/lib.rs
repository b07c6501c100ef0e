//! Command-line front end for the spinwire experiments.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<spinwire::Error> for CliError {
    fn from(e: spinwire::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinwire", version, about = "Entanglement transfer through Heisenberg spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, env = "SPINWIRE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory for data and metadata files (overrides `output_dir`).
    #[arg(long, global = true, env = "SPINWIRE_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, env = "SPINWIRE_THREADS")]
    pub threads: Option<usize>,
    /// Data file format (overrides `format`).
    #[arg(long, global = true, value_enum, env = "SPINWIRE_FORMAT")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// End-pair concurrence, purity, Werner parameter and fidelity over time.
    Transfer,
    /// First concurrence maximum against total length N for the configured J.
    ScanLength,
    /// First concurrence maximum against channel temperature.
    Thermal,
    /// First concurrence maximum against depolarizing rate.
    Decoherence,
    /// Pair concurrences across the chain and the bonds above threshold.
    Hopping,
    /// Overlap with the successive singlet-hopping product states.
    Overlap,
}

impl Command {
    pub fn experiment(self) -> Experiment {
        match self {
            Command::Transfer => Experiment::Transfer,
            Command::ScanLength => Experiment::ScanLength,
            Command::Thermal => Experiment::Thermal,
            Command::Decoherence => Experiment::Decoherence,
            Command::Hopping => Experiment::Hopping,
            Command::Overlap => Experiment::Overlap,
        }
    }
}

/// Loads the config, applies flag overrides and runs.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let path = cli.common.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(dir) = &cli.common.output_dir {
        cfg.output_dir = Some(dir.clone());
    }
    if let Some(f) = cli.common.format {
        cfg.format = Some(f);
    }
    run::run(cli.command.experiment(), &cfg, cli.common.threads)
}

pub fn main_with(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinwire: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
