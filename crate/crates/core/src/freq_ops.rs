//! Hard radial threshold on centered spectra and the batch operators built on it.
//!
//! `low_pass` and `high_pass` are complementary orthogonal projections on the
//! space of real images: the mask is symmetric under frequency negation, so a
//! masked Hermitian spectrum stays Hermitian.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::spectrum::{dft2, idft2, CenteredSpectrum};

/// Boolean low-band indicator: `low(i, j) = d((i, j), center) <= radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMask {
    height: usize,
    width: usize,
    radius: f64,
    low: Vec<bool>,
    all_pass: bool,
}

impl FrequencyMask {
    /// Builds the mask without consulting the cache.
    pub fn compute(height: usize, width: usize, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape(format!("mask {height}x{width}")));
        }
        let (ci, cj) = ((height / 2) as f64, (width / 2) as f64);
        let mut low = Vec::with_capacity(height * width);
        for i in 0..height {
            let di = i as f64 - ci;
            for j in 0..width {
                let dj = j as f64 - cj;
                low.push((di * di + dj * dj).sqrt() <= radius);
            }
        }
        let all_pass = low.iter().all(|&b| b);
        Ok(Self {
            height,
            width,
            radius,
            low,
            all_pass,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn low(&self) -> &[bool] {
        &self.low
    }

    pub fn is_low(&self, row: usize, col: usize) -> bool {
        self.low[row * self.width + col]
    }

    pub fn is_high(&self, row: usize, col: usize) -> bool {
        !self.is_low(row, col)
    }

    pub fn low_count(&self) -> usize {
        self.low.iter().filter(|&&b| b).count()
    }

    /// True when every bin is in the low band, i.e. the low-pass is the identity.
    pub fn is_all_pass(&self) -> bool {
        self.all_pass
    }
}

type MaskKey = (usize, usize, u64);

fn mask_cache() -> &'static RwLock<HashMap<MaskKey, Arc<FrequencyMask>>> {
    static CACHE: OnceLock<RwLock<HashMap<MaskKey, Arc<FrequencyMask>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached mask for an `height x width` grid at `radius`.
pub fn build_mask(height: usize, width: usize, radius: f64) -> Result<Arc<FrequencyMask>> {
    check_radius(radius)?;
    let key = (height, width, radius.to_bits());
    if let Some(mask) = mask_cache().read().unwrap().get(&key) {
        return Ok(Arc::clone(mask));
    }
    let mask = Arc::new(FrequencyMask::compute(height, width, radius)?);
    let mut cache = mask_cache().write().unwrap();
    Ok(Arc::clone(cache.entry(key).or_insert(mask)))
}

fn check_radius(radius: f64) -> Result<()> {
    // NaN fails this comparison as well.
    if radius >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(radius))
    }
}

fn check_transformable(height: usize, width: usize) -> Result<()> {
    if height < 2 || width < 2 {
        Err(Error::TooSmall { height, width })
    } else {
        Ok(())
    }
}

/// Splits `z` into `(low, high)` with `low + high == z` bin for bin.
pub fn split(z: &CenteredSpectrum, radius: f64) -> Result<(CenteredSpectrum, CenteredSpectrum)> {
    let (h, w, channels) = z.dims();
    let mask = build_mask(h, w, radius)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut low = z.clone();
    let mut high = z.clone();
    for c in 0..channels {
        let range = c * h * w..(c + 1) * h * w;
        let lo = &mut low.data_mut()[range.clone()];
        for (v, &keep) in lo.iter_mut().zip(mask.low()) {
            if !keep {
                *v = zero;
            }
        }
        let hi = &mut high.data_mut()[range];
        for (v, &drop) in hi.iter_mut().zip(mask.low()) {
            if drop {
                *v = zero;
            }
        }
    }
    Ok((low, high))
}

/// Image built from the bins within `radius` of DC.
pub fn low_pass(x: &ImageGrid, radius: f64) -> Result<ImageGrid> {
    check_transformable(x.height(), x.width())?;
    let mask = build_mask(x.height(), x.width(), radius)?;
    if mask.is_all_pass() {
        return Ok(x.clone());
    }
    let (low, _) = split(&dft2(x)?, radius)?;
    idft2(&low)
}

/// Image built from the bins outside `radius`.
pub fn high_pass(x: &ImageGrid, radius: f64) -> Result<ImageGrid> {
    check_transformable(x.height(), x.width())?;
    let mask = build_mask(x.height(), x.width(), radius)?;
    if mask.is_all_pass() {
        let (h, w, c) = x.dims();
        return ImageGrid::zeros(h, w, c);
    }
    let (_, high) = split(&dft2(x)?, radius)?;
    idft2(&high)
}

/// Low band of `low_source` joined with the high band of `high_source`.
pub fn mix_spectrum(
    low_source: &ImageGrid,
    high_source: &ImageGrid,
    radius: f64,
) -> Result<CenteredSpectrum> {
    low_source.ensure_same_shape(high_source)?;
    let (low, _) = split(&dft2(low_source)?, radius)?;
    let (_, high) = split(&dft2(high_source)?, radius)?;
    low.add(&high)
}

pub fn mix(low_source: &ImageGrid, high_source: &ImageGrid, radius: f64) -> Result<ImageGrid> {
    low_source.ensure_same_shape(high_source)?;
    check_transformable(low_source.height(), low_source.width())?;
    if build_mask(low_source.height(), low_source.width(), radius)?.is_all_pass() {
        return Ok(low_source.clone());
    }
    idft2(&mix_spectrum(low_source, high_source, radius)?)
}

/// Adjoint of [`low_pass`]. The projection is self-adjoint, so this is the
/// same filter applied to the upstream gradient.
pub fn low_pass_backward(upstream: &ImageGrid, radius: f64) -> Result<ImageGrid> {
    low_pass(upstream, radius)
}

/// Which frequency operation is applied before the discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FreqOpKind {
    #[default]
    None,
    /// Low-pass both reals and fakes.
    Hff,
    /// Keep reals; give each fake the high band of a real image.
    Hfc,
}

impl FreqOpKind {
    /// Applies the operation to a (reals, fakes) pair of batches.
    pub fn apply(
        self,
        reals: &[ImageGrid],
        fakes: &[ImageGrid],
        radius: f64,
        pairing_seed: u64,
    ) -> Result<(Vec<ImageGrid>, Vec<ImageGrid>)> {
        match self {
            FreqOpKind::None => Ok((reals.to_vec(), fakes.to_vec())),
            FreqOpKind::Hff => hff_batch(reals, fakes, radius),
            FreqOpKind::Hfc => hfc_batch(reals, fakes, radius, pairing_seed),
        }
    }
}

impl fmt::Display for FreqOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FreqOpKind::None => "none",
            FreqOpKind::Hff => "hff",
            FreqOpKind::Hfc => "hfc",
        })
    }
}

impl FromStr for FreqOpKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(FreqOpKind::None),
            "hff" => Ok(FreqOpKind::Hff),
            "hfc" => Ok(FreqOpKind::Hfc),
            other => Err(format!(
                "unknown frequency op `{other}` (expected none|hff|hfc)"
            )),
        }
    }
}

pub fn hff_batch(
    reals: &[ImageGrid],
    fakes: &[ImageGrid],
    radius: f64,
) -> Result<(Vec<ImageGrid>, Vec<ImageGrid>)> {
    let reals = reals
        .iter()
        .map(|x| low_pass(x, radius))
        .collect::<Result<Vec<_>>>()?;
    let fakes = fakes
        .iter()
        .map(|x| low_pass(x, radius))
        .collect::<Result<Vec<_>>>()?;
    Ok((reals, fakes))
}

/// Real index paired with each fake. Equal batch sizes give a random
/// permutation; otherwise indices are drawn uniformly with replacement.
pub fn hfc_pairing(n_reals: usize, n_fakes: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n_reals == n_fakes {
        let mut perm: Vec<usize> = (0..n_reals).collect();
        perm.shuffle(&mut rng);
        perm
    } else {
        (0..n_fakes).map(|_| rng.random_range(0..n_reals)).collect()
    }
}

pub fn hfc_batch(
    reals: &[ImageGrid],
    fakes: &[ImageGrid],
    radius: f64,
    pairing_seed: u64,
) -> Result<(Vec<ImageGrid>, Vec<ImageGrid>)> {
    if reals.is_empty() {
        return Err(Error::EmptyBatch("HFC needs at least one real image"));
    }
    let pairing = hfc_pairing(reals.len(), fakes.len(), pairing_seed);
    let mixed = fakes
        .iter()
        .zip(pairing)
        .map(|(fake, k)| mix(fake, &reals[k], radius))
        .collect::<Result<Vec<_>>>()?;
    Ok((reals.to_vec(), mixed))
}
