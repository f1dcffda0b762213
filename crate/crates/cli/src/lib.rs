//! Experiment runner: JSON configs in, CSV or JSON-lines records out.

pub mod config;
pub mod experiments;
pub mod record;
pub mod selfcheck;
pub mod setup;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, Format};
pub use record::Record;

/// Exit code for a run whose records are all unflagged.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
/// Some estimate was flagged (unresolved, diverged or a failed check).
pub const EXIT_FLAGGED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] kacrice_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Core(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Command-line and environment overrides of a loaded config.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    /// `--seed`; wins over everything else.
    pub seed: Option<u64>,
    /// `KACRICE_SEED`; wins over the config file.
    pub env_seed: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Seed actually used: flag, then environment, then config.
pub fn effective_seed(cfg: &ExperimentConfig, ov: &Overrides) -> Result<u64, CliError> {
    if let Some(s) = ov.seed {
        return Ok(s);
    }
    match ov.env_seed.as_deref().map(str::trim) {
        Some(s) if !s.is_empty() => s
            .parse()
            .map_err(|_| CliError::Validation(format!("at `KACRICE_SEED`: `{s}` is not an unsigned integer"))),
        _ => Ok(cfg.seed),
    }
}

/// Runs an experiment and returns its records without writing them.
pub fn execute(cfg: &ExperimentConfig, ov: &Overrides) -> Result<Vec<Record>, CliError> {
    cfg.validate()?;
    let seed = effective_seed(cfg, ov)?;
    experiments::run_experiment(cfg, seed)
}

/// Runs an experiment, writes its records and returns the exit code.
pub fn run(cfg: &ExperimentConfig, ov: &Overrides) -> Result<i32, CliError> {
    let records = execute(cfg, ov)?;
    let format = ov.format.unwrap_or(cfg.output.format);
    let path = ov.out.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(&p)?);
            record::write_records(&mut w, &records, format)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            record::write_records(&mut lock, &records, format)?;
            lock.flush()?;
        }
    }
    Ok(if records.iter().any(Record::is_flagged) {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    })
}
