//! Command-line driver: configuration, subcommand dispatch and output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, render_config, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "sgdelta",
    version,
    about = "Sine-Gordon dynamics with a point impurity"
)]
pub struct Cli {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel jobs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evolve the scenario datum and record the energy series.
    Run,
    /// Bottom of the spectrum of the linearization around the scenario wave.
    Spectrum,
    /// Nonlinear stability trial around the scenario wave.
    Stability,
    /// Growth-rate trial along the unstable direction.
    Instability,
    /// Kink-impurity scattering sweep over `sweep.speeds`.
    Sweep,
    /// Preconditioned descent on the static energy.
    Minimize,
    /// Run the acceptance suite.
    Validate {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
}

/// Loads the configuration named on the command line and applies the
/// flag overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.display().to_string();
    }
    Ok(cfg)
}

/// Runs one invocation; returns the human-readable summary.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cfg = load_config(cli)?;
    commands::dispatch(&cli.command, &cfg)
}
