//! Discriminator response to band-limited and band-swapped versions of a set.

use freqgan_core::{high_pass, low_pass, mix, ImageGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convert::Discriminator;
use crate::error::{ProbeError, Result};

/// Probe radii for 32x32 images; [`scaled_radii`] adapts them to other sizes.
pub const DEFAULT_RADII: [f64; 6] = [2.0, 4.0, 8.0, 12.0, 16.0, 20.0];

pub fn scaled_radii(size: usize) -> Vec<f64> {
    DEFAULT_RADII
        .iter()
        .map(|r| r * size as f64 / 32.0)
        .collect()
}

/// Mean post-sigmoid discriminator output for each input variant at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub radius: f64,
    /// Originals.
    pub mean_full: f64,
    /// Low band only.
    pub mean_low: f64,
    /// Own low band plus the high band of another image from the same set.
    pub mean_same_mix: f64,
    /// Own low band plus the high band of a donor-set image.
    pub mean_cross_mix: f64,
    /// High band only.
    pub mean_high: f64,
    pub samples: usize,
}

const CHUNK: usize = 64;

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn mean_response<D: Discriminator + ?Sized>(d: &D, images: &[ImageGrid]) -> Result<f64> {
    let mut sum = 0.0;
    for chunk in images.chunks(CHUNK) {
        let logits = d.logits(chunk)?;
        sum += logits.iter().map(|&t| sigmoid(t)).sum::<f64>();
    }
    Ok(sum / images.len() as f64)
}

/// Same-set partner (never the image itself when the set has two or more
/// images) and donor index for every primary image.
pub fn probe_pairing(n_primary: usize, n_donor: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let same = (0..n_primary)
        .map(|k| {
            if n_primary > 1 {
                (k + 1 + rng.random_range(0..n_primary - 1)) % n_primary
            } else {
                k
            }
        })
        .collect();
    let cross = (0..n_primary)
        .map(|_| rng.random_range(0..n_donor))
        .collect();
    (same, cross)
}

/// Runs `d` on the five variants of `primary` at every radius. Passing
/// (reals, fakes) probes how D treats real images; (fakes, reals) the reverse.
pub fn probe_components<D: Discriminator + ?Sized>(
    d: &D,
    primary: &[ImageGrid],
    donor: &[ImageGrid],
    radii: &[f64],
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    if primary.is_empty() {
        return Err(ProbeError::Empty("primary set"));
    }
    if donor.is_empty() {
        return Err(ProbeError::Empty("donor set"));
    }
    let shape = primary[0].dims();
    if let Some(bad) = primary.iter().chain(donor).find(|x| x.dims() != shape) {
        return Err(ProbeError::Shape(format!(
            "probe sets mix {:?} and {:?}",
            shape,
            bad.dims()
        )));
    }
    let (same, cross) = probe_pairing(primary.len(), donor.len(), seed);
    let mean_full = mean_response(d, primary)?;

    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut low = Vec::with_capacity(primary.len());
        let mut same_mix = Vec::with_capacity(primary.len());
        let mut cross_mix = Vec::with_capacity(primary.len());
        let mut high = Vec::with_capacity(primary.len());
        for (k, x) in primary.iter().enumerate() {
            low.push(low_pass(x, r)?);
            same_mix.push(mix(x, &primary[same[k]], r)?);
            cross_mix.push(mix(x, &donor[cross[k]], r)?);
            high.push(high_pass(x, r)?);
        }
        rows.push(ProbeRow {
            radius: r,
            mean_full,
            mean_low: mean_response(d, &low)?,
            mean_same_mix: mean_response(d, &same_mix)?,
            mean_cross_mix: mean_response(d, &cross_mix)?,
            mean_high: mean_response(d, &high)?,
            samples: primary.len(),
        });
    }
    Ok(rows)
}
