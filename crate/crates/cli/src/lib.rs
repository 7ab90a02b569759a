//! Command-line front end: `gen`, `sweep`, `evidence`, `deaton` and `occam`.
//!
//! Each command reads one JSON config (see `docs/config.md`), writes its
//! tables and plots into the output directory and returns the written paths.

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(#[from] ddlab::Error),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Verify(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ddlab", version, about = "Bayesian model selection and double-descent experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
    /// Run cross-module identity checks where available.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (dataset.csv + dataset.json).
    Gen(CommonArgs),
    /// Risk, train error, evidence and BIC across model complexities.
    Sweep(CommonArgs),
    /// Log evidence by polynomial degree for each seed or a dataset file.
    Evidence(CommonArgs),
    /// Ordered empirical-Bayes fit with PAVA-pooled hyperparameters.
    Deaton(CommonArgs),
    /// Evidence of discrete sequence hypotheses.
    Occam(CommonArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Gen(a) | Command::Sweep(a) | Command::Evidence(a) | Command::Deaton(a) | Command::Occam(a) => a,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let args = cli.command.common();
    let config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let opts = commands::Options {
        out: args.out.clone(),
        svg: args.svg,
        verify: args.verify,
    };
    match cli.command {
        Command::Gen(_) => commands::cmd_gen(&config, &opts),
        Command::Sweep(_) => commands::cmd_sweep(&config, &opts),
        Command::Evidence(_) => commands::cmd_evidence(&config, &opts),
        Command::Deaton(_) => commands::cmd_deaton(&config, &opts),
        Command::Occam(_) => commands::cmd_occam(&config, &opts),
    }
}
