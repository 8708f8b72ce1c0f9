//! Library side of the `qcar` command: run-document parsing and the
//! `simulate`, `optimize` and `compare` subcommands.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::Overrides;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric divergence: {0}")]
    Divergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn from_core(e: qcar_core::Error) -> Self {
        match e {
            qcar_core::Error::Divergence(what) => CliError::Divergence(what.to_string()),
            qcar_core::Error::Csv(m) => CliError::Io(m),
            other => CliError::Config(other.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qcar",
    version,
    about = "Quarter-car fuzzy suspension control: simulate, tune, compare"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one closed-loop simulation and write its trajectory and metrics.
    Simulate(Common),
    /// Tune the controller genome with BBO, PSO or GA.
    Optimize(Common),
    /// Build the controller-by-disturbance MSE table.
    Compare(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run document.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `optimizer.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `run.dt` [s].
    #[arg(long)]
    dt: Option<f64>,
    /// Overrides `run.horizon` [s].
    #[arg(long)]
    horizon: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            dt: self.dt,
            horizon: self.horizon,
        }
    }
}

/// Parse `args` (including the program name) and run the subcommand,
/// writing progress to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => commands::simulate(&c.config, &c.overrides(), out),
        Command::Optimize(c) => commands::optimize(&c.config, &c.overrides(), out),
        Command::Compare(c) => commands::compare(&c.config, &c.overrides(), out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qcar: {e}");
            e.exit_code()
        }
    }
}
