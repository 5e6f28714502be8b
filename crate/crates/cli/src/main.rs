//! `kdpp`: sampling, convergence studies and identity checks from TOML configs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] kernel_dpp::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kdpp", version, about = "Kernel reconstruction from randomized node designs")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one design per (N, replicate) and write node and log CSVs.
    Sample {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo error study and fit log-log slopes.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one identity suite: ez-unbiased, ez-variance, ez-uncorrelated,
    /// kale, tels-identity, iop, eps-bound or cvs-mixture.
    Verify {
        suite: String,
        /// Monte Carlo replicates (suite default when omitted).
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print an annotated configuration with every field and default.
    ConfigSchema,
}

fn load(path: &PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let out = out.unwrap_or_else(|| cfg.output.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Sample { config, seed, out } => {
            let (cfg, out) = load(&config, seed, out)?;
            commands::sample(&cfg, &out)
        }
        Command::Study { config, seed, out } => {
            let (cfg, out) = load(&config, seed, out)?;
            commands::study(&cfg, &out)
        }
        Command::Verify { suite, replicates, seed } => commands::verify(&suite, replicates, seed),
        Command::ConfigSchema => {
            print!("{}", config::SCHEMA);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kdpp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
