mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagrangekit::BasisVariant;

use crate::config::{ExperimentConfig, Overrides};
use crate::error::AppError;

/// Full, truncated and local Lagrange bases and their diagnostics.
///
/// Settings come from the JSON file given by --config (missing fields take
/// defaults); flags given on the command line override the file, and
/// LAGRANGEKIT_THREADS is used when --threads is absent.
#[derive(Parser, Debug)]
#[command(name = "lagrangekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate Ξ and its extension X̃ for every n, with geometry statistics.
    GenPoints(Common),
    /// Build the basis of the configured variant on the generated points.
    BuildBasis(Common),
    /// Run the configured checks on the stored bases.
    Diagnose(Common),
    /// Run the acceptance suite.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "LAGRANGEKIT_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<BasisVariant>,
    /// Footprint constant K.
    #[arg(long = "K")]
    k: Option<f64>,
    /// Comma-separated smoothness indices (0, 1, 2 or m).
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<String>>,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated criterion ids to run (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
    /// Rerun with this many threads and require identical reports.
    #[arg(long)]
    verify_threads: Option<usize>,
}

fn parse_variant(s: &str) -> Result<BasisVariant, String> {
    s.parse()
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, AppError> {
        ExperimentConfig::load(
            self.config.as_deref(),
            Overrides {
                out: self.out.clone(),
                seed: self.seed,
                threads: self.threads,
                variant: self.variant,
                k: self.k,
                sigma: self.sigma.clone(),
            },
        )
    }
}

fn with_threads<T>(config: &ExperimentConfig, f: impl FnOnce() -> Result<T, AppError> + Send) -> Result<T, AppError>
where
    T: Send,
{
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::Config(format!("cannot start {n} threads: {e}")))?
            .install(f),
        None => f(),
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::GenPoints(c) => {
            let config = c.load()?;
            with_threads(&config, || commands::gen_points(&config))
        }
        Command::BuildBasis(c) => {
            let config = c.load()?;
            with_threads(&config, || commands::build_basis(&config))
        }
        Command::Diagnose(c) => {
            let config = c.load()?;
            with_threads(&config, || commands::diagnose(&config))
        }
        Command::Sweep(s) => {
            let config = s.common.load()?;
            if s.verify_threads == Some(0) {
                return Err(AppError::Config("--verify-threads must be at least 1".into()));
            }
            commands::sweep(&config, s.only.as_deref(), s.verify_threads)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lagrangekit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
