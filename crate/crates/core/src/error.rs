use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite value {value} at flat index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("grid {height}x{width} is too small for a 2D transform (need at least 2x2)")]
    TooSmall { height: usize, width: usize },

    #[error("imaginary residual {residual:e} exceeds {tolerance:e}: spectrum is not conjugate-symmetric")]
    BrokenSymmetry { residual: f64, tolerance: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("radius must be a non-negative number, got {0}")]
    InvalidRadius(f64),

    #[error("empty batch: {0}")]
    EmptyBatch(&'static str),

    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: ::image::ImageError,
    },
}
