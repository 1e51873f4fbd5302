//! The `gain` command-line front end.
//!
//! Settings come from built-in defaults, then an optional `--config` file,
//! then `--set key=value` pairs, then dedicated flags. Every random choice
//! derives from the single `--seed`, so reruns reproduce their outputs
//! byte for byte.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, LossHistoryWriter};
pub use config::{RunConfig, RUN_KEYS};

use crate::data::DataError;
use crate::evaluation::EvalError;
use crate::gain::GainError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("{0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Divergence(_) => 3,
        }
    }
}

impl From<GainError> for CliError {
    fn from(e: GainError) -> Self {
        match e {
            GainError::Divergence { .. } => CliError::Divergence(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Gain(g) => g.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "gain", version, about = "Generative adversarial imputation for tabular data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Cell text that marks a missing value (default: empty field).
    #[arg(long, global = true)]
    pub missing_token: Option<String>,
    /// Overrides any configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Removes cells completely at random from a fully observed CSV.
    Mask {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rate: Option<f64>,
        /// Mask exactly round(rate * cells) cells instead of each cell independently.
        #[arg(long)]
        exact_count: bool,
        /// Masked CSV path; the mask and ground truth are written beside it.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Trains a model and writes it with its loss history.
    Train {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        variant: Option<String>,
        /// Model file (default: <out-dir>/model.gain).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Writes one completed CSV per imputation draw.
    Impute {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Cross-validated RMSE (and AUROC with a label) against mean imputation.
    Evaluate {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated missing rates; one report per rate.
        #[arg(long, value_delimiter = ',')]
        rates: Vec<f64>,
        /// Include wall time in the report file.
        #[arg(long)]
        record_time: bool,
    },
    /// Trains every ablation variant per seed and compares their RMSE.
    Ablate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        record_time: bool,
    },
    /// Analytic gradients against central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 50)]
        networks: usize,
        /// Scales analytic gradients before comparing; the check must then fail.
        #[arg(long, hide = true)]
        corrupt: Option<f64>,
    },
    /// Exact optimal-discriminator table and a trained discriminator against it.
    Oracle {
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
