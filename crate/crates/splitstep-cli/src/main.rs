//! `splitstep`: simulate decoupled split-step walks on the line and export
//! phase diagrams, edge-state reports, distillation curves, interferometric
//! eigenvalue read-outs and intensity evolution records as CSV/JSON.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical contract violated: {0}")]
    Compute(#[from] splitstep::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Key-value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Inline override, repeatable: --set key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output file; stdout when omitted. Required for stochastic runs.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Random seed. Required for stochastic runs.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Optional JSON dump of the final distilled state.
    #[arg(long, value_name = "PATH")]
    state_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Winding numbers and band gaps over the coin-parameter plane (CSV).
    PhaseDiagram(CommonArgs),
    /// Analytic boundary eigenstate report with residuals (JSON).
    EdgeState(CommonArgs),
    /// Distillation similarity per step, plus an optional state dump (CSV).
    Distill(DistillArgs),
    /// Interferometric eigenvalue read-out runs (CSV).
    Interfere(CommonArgs),
    /// Per-roundtrip intensity record of the walk (CSV).
    Evolution(CommonArgs),
}

#[derive(Debug, Parser)]
#[command(name = "splitstep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PhaseDiagram(args) => commands::phase_diagram(&args),
        Command::EdgeState(args) => commands::edge_state(&args),
        Command::Distill(args) => commands::distill(&args),
        Command::Interfere(args) => commands::interfere(&args),
        Command::Evolution(args) => commands::evolution(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
