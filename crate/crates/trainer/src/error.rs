use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Data(String),
    #[error("non-finite value at step {step} ({what}); last good checkpoint: {}",
        .last_checkpoint.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "none".into()))]
    NonFinite {
        step: usize,
        what: String,
        last_checkpoint: Option<PathBuf>,
    },
    #[error(transparent)]
    Core(#[from] freqgan_core::Error),
    #[error(transparent)]
    Nn(#[from] freqgan_nn::NnError),
    #[error(transparent)]
    Probe(#[from] freqgan_probe::ProbeError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
