//! Minimal dense/convolutional networks with a recorded forward tape and
//! hand-written reverse-mode backward passes, in double precision.
//!
//! Activations are batch-major: `[batch, features]` for dense layers and
//! `[batch, channels, height, width]` for spatial ones.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod layer;
pub mod loss;
pub mod network;
pub mod spectral_norm;
pub mod tensor;

pub use crate::adam::{adam_step, Adam, AdamConfig, AdamState};
pub use crate::checkpoint::Checkpoint;
pub use crate::error::{NnError, Result};
pub use crate::layer::LayerSpec;
pub use crate::loss::LossKind;
pub use crate::network::{Network, Tape};
pub use crate::spectral_norm::{spectral_normalize, PowerIteration, SIGMA_FLOOR};
pub use crate::tensor::Tensor;
