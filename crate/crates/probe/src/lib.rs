//! Instruments for looking at GANs in the frequency domain: discriminator
//! responses to band-limited and band-swapped inputs, corpus radial power
//! spectra, and real-minus-fake bias curves.

pub mod bias;
pub mod components;
pub mod convert;
pub mod error;
pub mod plot;
pub mod report;

pub use crate::bias::{bias_area, bias_curve, bias_onset, corpus_rps, BiasCurve};
pub use crate::components::{
    probe_components, probe_pairing, scaled_radii, ProbeRow, DEFAULT_RADII,
};
pub use crate::convert::{images_to_tensor, tensor_to_images, Discriminator};
pub use crate::error::{ProbeError, Result};
pub use crate::plot::{plot_lines, Series};
pub use crate::report::{
    fmt_f64, write_curve_csv, write_power_spectrum_csv, write_probe_csv, write_profile_csv,
};
