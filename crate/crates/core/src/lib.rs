//! Spectral analysis primitives for image grids.
//!
//! Images are stored channel-planar (`c * H * W + i * W + j`). Spectra are kept
//! DC-centered: the zero-frequency bin of an `H x W` grid sits at
//! `(H / 2, W / 2)` (integer division), so centered index `i` carries the
//! signed frequency `i - H / 2`.

pub mod error;
pub mod freq_ops;
pub mod image;
pub mod io;
pub mod spectrum;

pub use crate::error::{Error, Result};
pub use crate::freq_ops::{
    build_mask, hfc_batch, hfc_pairing, hff_batch, high_pass, low_pass, low_pass_backward, mix,
    mix_spectrum, split, FreqOpKind, FrequencyMask,
};
pub use crate::image::ImageGrid;
pub use crate::spectrum::{
    dft2, idft2, idft2_with_residual, power_spectrum, radial_bin_count, radial_profile,
    CenteredSpectrum, PowerSpectrum, RadialProfile, POWER_EPS,
};
