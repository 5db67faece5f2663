//! Experiment driver: every pipeline stage as a subcommand emitting CSV/JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Experiment, ExperimentConfig, Overrides};

/// Errors split by exit code: 2 for configuration problems, 3 for numerical
/// failures encountered while the experiment runs.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl From<ltiguard::Error> for CliError {
    fn from(e: ltiguard::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "ltiguard",
    version,
    about = "Hankel-based attack detection experiments for discrete-time LTI systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the configured plant and write it as system JSON.
    Generate(CommonArgs),
    /// Report observability/excitability indices and safe horizons.
    Indices(CommonArgs),
    /// Rank of the heuristic-window Hankel matrix over growing horizons.
    RankCurve(CommonArgs),
    /// Run the model-based and data-driven monitors side by side.
    Monitor(CommonArgs),
    /// Search for an input burst that no output-based monitor can see.
    SynthesizeAttack(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory receiving the emitted artifacts.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override every seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the monitor residual threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Override the relative singular-value cutoff for rank decisions.
    #[arg(long)]
    tol_rel: Option<f64>,
}

impl CommonArgs {
    fn load(&self) -> Result<Experiment, CliError> {
        let text = std::fs::read_to_string(&self.config).map_err(|e| {
            CliError::Config(format!("cannot read {}: {e}", self.config.display()))
        })?;
        let parsed: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", self.config.display())))?;
        let overrides = Overrides {
            seed: self.seed,
            threshold: self.threshold,
            tol_rel: self.tol_rel,
        };
        parsed.resolve(&overrides)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => commands::generate(&args.load()?, &args.out),
        Command::Indices(args) => commands::indices(&args.load()?, &args.out),
        Command::RankCurve(args) => commands::rank_curve_cmd(&args.load()?, &args.out),
        Command::Monitor(args) => commands::monitor(&args.load()?, &args.out),
        Command::SynthesizeAttack(args) => commands::synthesize_attack(&args.load()?, &args.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
