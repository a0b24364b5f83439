pub type Result<T> = std::result::Result<T, NnError>;

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite activation after layer {layer} ({spec})")]
    NonFinite { layer: usize, spec: String },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NnError {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        NnError::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
