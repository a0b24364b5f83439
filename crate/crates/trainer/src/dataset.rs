//! Training images: synthetic power-law fields or a PNG directory.

use std::path::Path;

use freqgan_core::io::{load_png_dir, LoadedDir};
use freqgan_core::{dft2, idft2, ImageGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::config::DatasetSpec;
use crate::error::{Result, TrainError};
use crate::seed::derive_seed;

const DATA_STREAM: u64 = 0x5eed_da7a;

/// `n` images for a synthetic spec, or the corpus for a directory spec
/// (in which case `n` is ignored).
pub fn make_dataset(
    spec: &DatasetSpec,
    channels: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<ImageGrid>> {
    match spec {
        DatasetSpec::Synthetic { .. } => make_synthetic_dataset(spec, channels, n, seed),
        DatasetSpec::Corpus { path, size } => Ok(load_corpus(path, *size, channels)?.images),
    }
}

/// Gaussian random fields with amplitude `(1 + d)^-alpha` over radius `d`,
/// plus a Poisson number of hard-edged rectangles (mean
/// `edge_density * N^2 / 64`), rescaled per image to `[-1, 1]`.
pub fn make_synthetic_dataset(
    spec: &DatasetSpec,
    channels: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<ImageGrid>> {
    let DatasetSpec::Synthetic {
        alpha,
        edge_density,
        size,
    } = *spec
    else {
        return Err(TrainError::Data("not a synthetic dataset spec".into()));
    };
    if n == 0 {
        return Err(TrainError::Data("requested zero images".into()));
    }
    (0..n)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64, DATA_STREAM));
            synthetic_image(size, channels, alpha, edge_density, &mut rng)
        })
        .collect()
}

fn synthetic_image(
    size: usize,
    channels: usize,
    alpha: f64,
    edge_density: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ImageGrid> {
    let noise = ImageGrid::from_fn(size, size, channels, |_, _, _| StandardNormal.sample(rng))?;
    let mut z = dft2(&noise)?;
    let (ci, cj) = z.center();
    let plane = size * size;
    for (k, v) in z.data_mut().iter_mut().enumerate() {
        let (i, j) = ((k % plane) / size, k % size);
        let d = ((i as f64 - ci as f64).powi(2) + (j as f64 - cj as f64).powi(2)).sqrt();
        *v *= (1.0 + d).powf(-alpha);
    }
    let field = idft2(&z)?;

    let mut data = field.into_data();
    for c in data.chunks_mut(plane) {
        let mean = c.iter().sum::<f64>() / plane as f64;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / plane as f64;
        let std = var.sqrt().max(1e-12);
        for v in c.iter_mut() {
            *v = (*v - mean) / std;
        }
    }

    let lambda = edge_density * (size * size) as f64 / 64.0;
    let count = if lambda > 0.0 {
        Poisson::new(lambda)
            .map_err(|e| TrainError::Data(format!("edge density: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    for _ in 0..count {
        let h = rng.random_range(2..=size / 2);
        let w = rng.random_range(2..=size / 2);
        let i0 = rng.random_range(0..=size - h);
        let j0 = rng.random_range(0..=size - w);
        for c in 0..channels {
            let value: f64 = rng.random_range(-2.0..2.0);
            for i in i0..i0 + h {
                for j in j0..j0 + w {
                    data[c * plane + i * size + j] = value;
                }
            }
        }
    }

    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = hi - lo;
    for v in data.iter_mut() {
        *v = if span > 0.0 {
            2.0 * (*v - lo) / span - 1.0
        } else {
            0.0
        };
    }
    Ok(ImageGrid::new(size, size, channels, data)?)
}

/// Loads every decodable PNG under `path` at `size x size`. Undecodable files
/// are skipped with a warning; an empty result is an error.
pub fn load_corpus(path: &Path, size: usize, channels: usize) -> Result<LoadedDir> {
    let loaded = load_png_dir(path, Some(size as u32), Some(channels))?;
    for (file, reason) in &loaded.skipped {
        log::warn!("skipping {}: {reason}", file.display());
    }
    if !loaded.skipped.is_empty() {
        log::warn!(
            "{} of {} files in {} could not be read",
            loaded.skipped.len(),
            loaded.skipped.len() + loaded.images.len(),
            path.display()
        );
    }
    if loaded.images.is_empty() {
        return Err(TrainError::Data(format!(
            "no usable PNG images in {}",
            path.display()
        )));
    }
    Ok(loaded)
}
