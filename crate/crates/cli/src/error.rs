use std::fmt;
use std::path::Path;

use freqgan_train::TrainError;

/// A failure with a short machine-readable kind: `usage`, `input`, `config`,
/// `data`, `diverged` or `io`.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }

    pub fn missing(path: &Path) -> Self {
        Self::new("input", format!("{} does not exist", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<freqgan_core::Error> for CliError {
    fn from(e: freqgan_core::Error) -> Self {
        let kind = match e {
            freqgan_core::Error::Image { .. } => "input",
            freqgan_core::Error::InvalidRadius(_) => "usage",
            _ => "data",
        };
        Self::new(kind, e.to_string())
    }
}

impl From<freqgan_nn::NnError> for CliError {
    fn from(e: freqgan_nn::NnError) -> Self {
        Self::new("input", e.to_string())
    }
}

impl From<freqgan_probe::ProbeError> for CliError {
    fn from(e: freqgan_probe::ProbeError) -> Self {
        use freqgan_probe::ProbeError as P;
        match e {
            P::Core(inner) => inner.into(),
            P::Nn(inner) => inner.into(),
            P::Io(_) | P::Csv(_) => Self::new("io", e.to_string()),
            _ => Self::new("data", e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let kind = match &e {
            TrainError::ConfigLine { .. } | TrainError::Config(_) => "config",
            TrainError::Data(_) => "data",
            TrainError::NonFinite { .. } => "diverged",
            TrainError::Core(_) | TrainError::Nn(_) | TrainError::Probe(_) => "data",
            TrainError::Csv(_) | TrainError::Io(_) => "io",
        };
        Self::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e.to_string())
    }
}
