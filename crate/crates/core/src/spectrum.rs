use std::cell::RefCell;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// Floor added to magnitudes before taking the log in [`power_spectrum`].
pub const POWER_EPS: f64 = 1e-12;

/// Relative imaginary residual above which [`idft2`] refuses the spectrum.
const SYMMETRY_TOLERANCE: f64 = 1e-6;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Complex spectrum with DC at `(H / 2, W / 2)`, channel-planar.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredSpectrum {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<Complex64>,
}

impl CenteredSpectrum {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<Complex64>) -> Result<Self> {
        if height == 0 || width == 0 || !(channels == 1 || channels == 3) {
            return Err(Error::InvalidShape(format!(
                "spectrum {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::InvalidShape(format!(
                "spectrum {height}x{width}x{channels} needs {} bins, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![Complex64::new(0.0, 0.0); height * width * channels],
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    /// Index of the DC bin, `(H / 2, W / 2)`.
    pub fn center(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, channel: usize, row: usize, col: usize) -> Complex64 {
        self.data[(channel * self.height + row) * self.width + col]
    }

    pub fn plane(&self, channel: usize) -> &[Complex64] {
        let n = self.height * self.width;
        &self.data[channel * n..(channel + 1) * n]
    }

    /// Index of the bin holding the negated frequency of `(row, col)`.
    pub fn mirror(&self, row: usize, col: usize) -> (usize, usize) {
        let (ci, cj) = self.center();
        (
            (2 * ci + self.height - row) % self.height,
            (2 * cj + self.width - col) % self.width,
        )
    }

    /// Largest `|z(mirror(k)) - conj(z(k))|` relative to the largest magnitude.
    pub fn symmetry_error(&self) -> f64 {
        let scale = self.max_magnitude();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for c in 0..self.channels {
            for i in 0..self.height {
                for j in 0..self.width {
                    let (mi, mj) = self.mirror(i, j);
                    let d = (self.get(c, mi, mj) - self.get(c, i, j).conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst / scale
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn add(&self, other: &CenteredSpectrum) -> Result<CenteredSpectrum> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CenteredSpectrum::new(self.height, self.width, self.channels, data)
    }

    pub fn scaled(&self, factor: f64) -> CenteredSpectrum {
        CenteredSpectrum {
            data: self.data.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }
}

/// Unnormalized forward DFT per channel, shifted so DC sits at the center.
pub fn dft2(image: &ImageGrid) -> Result<CenteredSpectrum> {
    let (h, w, channels) = image.dims();
    if h < 2 || w < 2 {
        return Err(Error::TooSmall {
            height: h,
            width: w,
        });
    }
    if let Some((index, &value)) = image
        .data()
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite())
    {
        return Err(Error::NonFinite { index, value });
    }
    let (ci, cj) = (h / 2, w / 2);
    let mut out = vec![Complex64::new(0.0, 0.0); h * w * channels];
    let mut buf = vec![Complex64::new(0.0, 0.0); h * w];
    for c in 0..channels {
        for (b, &v) in buf.iter_mut().zip(image.plane(c)) {
            *b = Complex64::new(v, 0.0);
        }
        fft2_in_place(h, w, &mut buf, false);
        let dst = &mut out[c * h * w..(c + 1) * h * w];
        for i in 0..h {
            let si = (i + ci) % h;
            for j in 0..w {
                dst[si * w + (j + cj) % w] = buf[i * w + j];
            }
        }
    }
    CenteredSpectrum::new(h, w, channels, out)
}

/// Inverse of [`dft2`]; fails if the result has a significant imaginary part.
pub fn idft2(spectrum: &CenteredSpectrum) -> Result<ImageGrid> {
    idft2_with_residual(spectrum).map(|(img, _)| img)
}

/// Like [`idft2`], also returning the largest absolute imaginary residual.
pub fn idft2_with_residual(spectrum: &CenteredSpectrum) -> Result<(ImageGrid, f64)> {
    let (h, w, channels) = spectrum.dims();
    if h < 2 || w < 2 {
        return Err(Error::TooSmall {
            height: h,
            width: w,
        });
    }
    let (ci, cj) = spectrum.center();
    let norm = 1.0 / (h * w) as f64;
    let mut real = vec![0.0; h * w * channels];
    let mut buf = vec![Complex64::new(0.0, 0.0); h * w];
    let mut residual: f64 = 0.0;
    let mut max_mag: f64 = 0.0;
    for c in 0..channels {
        let src = spectrum.plane(c);
        for i in 0..h {
            let si = (i + ci) % h;
            for j in 0..w {
                buf[i * w + j] = src[si * w + (j + cj) % w];
            }
        }
        fft2_in_place(h, w, &mut buf, true);
        for (dst, z) in real[c * h * w..(c + 1) * h * w].iter_mut().zip(&buf) {
            let z = z * norm;
            residual = residual.max(z.im.abs());
            max_mag = max_mag.max(z.norm());
            *dst = z.re;
        }
    }
    let tolerance = SYMMETRY_TOLERANCE * max_mag;
    if residual > tolerance {
        return Err(Error::BrokenSymmetry {
            residual,
            tolerance,
        });
    }
    Ok((ImageGrid::new(h, w, channels, real)?, residual))
}

/// Row-major in-place 2D FFT (no normalization).
fn fft2_in_place(h: usize, w: usize, buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
        } else {
            (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
        };
        row_fft.process(buf);
        let mut col = vec![Complex64::new(0.0, 0.0); h];
        for j in 0..w {
            for i in 0..h {
                col[i] = buf[i * w + j];
            }
            col_fft.process(&mut col);
            for i in 0..h {
                buf[i * w + j] = col[i];
            }
        }
    });
}

/// Single-plane dB power spectrum on the centered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl PowerSpectrum {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn center(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }
}

/// `20 * log10(|z| + eps)`, averaging `|z|` over channels first.
pub fn power_spectrum(spectrum: &CenteredSpectrum) -> PowerSpectrum {
    let (h, w, channels) = spectrum.dims();
    let n = h * w;
    let mut mag = vec![0.0; n];
    for c in 0..channels {
        for (m, z) in mag.iter_mut().zip(spectrum.plane(c)) {
            *m += z.norm();
        }
    }
    let data = mag
        .into_iter()
        .map(|m| 20.0 * (m / channels as f64 + POWER_EPS).log10())
        .collect();
    PowerSpectrum {
        height: h,
        width: w,
        data,
    }
}

/// Per-annulus mean of a power spectrum, annuli at integer rounded radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    /// Mean dB value per radius bin.
    pub bins: Vec<f64>,
    /// Pixels contributing to each bin.
    pub counts: Vec<usize>,
    /// Pixels whose rounded radius lies beyond the last bin.
    pub discarded: usize,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// `floor(min(H, W) / sqrt(2)) + 1`.
pub fn radial_bin_count(height: usize, width: usize) -> usize {
    (height.min(width) as f64 / SQRT_2).floor() as usize + 1
}

/// Empty bins, which only occur for odd sizes, read 0.
pub fn radial_profile(ps: &PowerSpectrum) -> RadialProfile {
    let n_bins = radial_bin_count(ps.height, ps.width);
    let (ci, cj) = ps.center();
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    let mut discarded = 0;
    for i in 0..ps.height {
        let di = i as f64 - ci as f64;
        for j in 0..ps.width {
            let dj = j as f64 - cj as f64;
            let bin = (di * di + dj * dj).sqrt().round() as usize;
            if bin < n_bins {
                sums[bin] += ps.get(i, j);
                counts[bin] += 1;
            } else {
                discarded += 1;
            }
        }
    }
    let bins = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &n)| if n > 0 { s / n as f64 } else { 0.0 })
        .collect();
    RadialProfile {
        bins,
        counts,
        discarded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_dc_only() {
        let img = ImageGrid::constant(4, 4, 1, 1.0).unwrap();
        let z = dft2(&img).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (2, 2) { 16.0 } else { 0.0 };
                assert!((z.get(0, i, j) - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_has_two_bins() {
        let img = ImageGrid::from_fn(8, 8, 1, |_, m, _| {
            (2.0 * std::f64::consts::PI * m as f64 / 8.0).cos()
        })
        .unwrap();
        let z = dft2(&img).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let mag = z.get(0, i, j).norm();
                if (i == 3 || i == 5) && j == 4 {
                    assert!((mag - 32.0).abs() < 1e-10, "({i},{j}) = {mag}");
                } else {
                    assert!(mag < 1e-10, "({i},{j}) = {mag}");
                }
            }
        }
    }

    #[test]
    fn too_small_rejected() {
        let img = ImageGrid::zeros(1, 4, 1).unwrap();
        assert!(matches!(dft2(&img), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn zero_spectrum_gives_zero_image() {
        let z = CenteredSpectrum::zeros(6, 5, 3).unwrap();
        let (img, residual) = idft2_with_residual(&z).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn halved_constant_spectrum() {
        let img = ImageGrid::constant(4, 6, 1, 0.8).unwrap();
        let half = idft2(&dft2(&img).unwrap().scaled(0.5)).unwrap();
        assert!(half.data().iter().all(|v| (v - 0.4).abs() < 1e-14));
    }

    #[test]
    fn asymmetric_spectrum_fails_loudly() {
        let mut z = CenteredSpectrum::zeros(4, 4, 1).unwrap();
        z.data_mut()[2 * 4 + 3] = Complex64::new(1.0, 0.0);
        assert!(matches!(idft2(&z), Err(Error::BrokenSymmetry { .. })));
    }

    #[test]
    fn power_spectrum_floor_and_unit() {
        let mut z = CenteredSpectrum::zeros(2, 2, 1).unwrap();
        z.data_mut()[0] = Complex64::new(0.0, 1.0);
        let ps = power_spectrum(&z);
        assert!(ps.data[0].abs() < 1e-10);
        assert_eq!(ps.data[1], -240.0);
    }

    #[test]
    fn power_spectrum_dc_of_constant() {
        let img = ImageGrid::constant(4, 4, 1, 1.0).unwrap();
        let ps = power_spectrum(&dft2(&img).unwrap());
        let expected = 20.0 * (16.0f64 + 1e-12).log10();
        assert!((ps.get(2, 2) - expected).abs() < 1e-12);
        assert!((ps.get(2, 2) - 24.082).abs() < 1e-3);
    }

    #[test]
    fn power_spectrum_averages_channel_magnitudes() {
        let mut z = CenteredSpectrum::zeros(2, 2, 3).unwrap();
        z.data_mut()[0] = Complex64::new(3.0, 0.0);
        z.data_mut()[4] = Complex64::new(0.0, -6.0);
        let ps = power_spectrum(&z);
        assert!((ps.data[0] - 20.0 * (3.0f64 + 1e-12).log10()).abs() < 1e-12);
    }

    #[test]
    fn radial_bin_zero_is_center() {
        let ps = PowerSpectrum {
            height: 5,
            width: 5,
            data: (0..25).map(|v| v as f64).collect(),
        };
        let rp = radial_profile(&ps);
        assert_eq!(rp.bins[0], ps.get(2, 2));
        assert_eq!(rp.counts[0], 1);
    }

    #[test]
    fn radial_counts_on_4x4() {
        let ps = PowerSpectrum {
            height: 4,
            width: 4,
            data: vec![1.0; 16],
        };
        let rp = radial_profile(&ps);
        // Offsets -2..=1 per axis: d=1 at the four axis neighbours; d=sqrt(2)
        // rounds to 1 as well, but bins stop at floor(4/sqrt2)=2.
        assert_eq!(rp.counts.len(), 3);
        assert_eq!(rp.counts[0], 1);
        assert_eq!(rp.counts[1], 4 + 4);
        assert_eq!(rp.counts.iter().sum::<usize>() + rp.discarded, 16);
    }

    #[test]
    fn radial_profile_of_constant_is_constant() {
        let ps = PowerSpectrum {
            height: 16,
            width: 12,
            data: vec![-3.5; 192],
        };
        let rp = radial_profile(&ps);
        assert!(rp.bins.iter().all(|&b| b == -3.5));
        assert!(rp.counts.iter().all(|&n| n >= 1));
    }
}
