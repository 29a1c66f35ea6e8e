//! `predprey` command-line interface.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 the model
//! violates the standing assumptions, 3 every simulated path diverged.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::CliError;
pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "predprey",
    version,
    about = "Stochastic predator-prey simulator and regime analyzer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the model against the standing assumptions.
    Validate(Common),
    /// Classify each species' long-run regime from the rate conditions.
    Classify(Common),
    /// Simulate one trajectory.
    Simulate(Common),
    /// Run a Monte Carlo ensemble and check every applicable conclusion.
    Ensemble(Common),
    /// Measure strong and weak convergence orders of the integrator.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (JSON).
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Use a built-in model instead of a config file.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Permit `b_2 ≡ 0` (comparison with the deterministic limit).
    #[arg(long)]
    pub allow_degenerate: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for ensembles (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated step sizes.
    #[arg(long, value_delimiter = ',')]
    pub dts: Option<Vec<f64>>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match commands::dispatch(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
