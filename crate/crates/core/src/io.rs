//! 8-bit PNG import/export.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::imageops::{self, FilterType as ResizeFilter};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::image::ImageGrid;

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Channel count a decoded image maps to: grayscale stays 1, anything else 3.
pub fn natural_channels(img: &DynamicImage) -> usize {
    if img.color().has_color() {
        3
    } else {
        1
    }
}

/// Converts a decoded image to a grid with the requested channel count.
pub fn grid_from_dynamic(img: &DynamicImage, channels: usize) -> Result<ImageGrid> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match channels {
        1 => ImageGrid::from_bytes(h, w, 1, img.to_luma8().as_raw()),
        3 => ImageGrid::from_bytes(h, w, 3, img.to_rgb8().as_raw()),
        c => Err(Error::InvalidShape(format!(
            "channels must be 1 or 3, got {c}"
        ))),
    }
}

pub fn decode_png(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| image_err(path, e))
}

/// Loads a PNG at its native size.
pub fn load_png(path: &Path) -> Result<ImageGrid> {
    let img = decode_png(path)?;
    grid_from_dynamic(&img, natural_channels(&img))
}

/// Center-crops to a square and bilinearly resizes to `size x size`.
pub fn square_resize(img: &DynamicImage, size: u32) -> DynamicImage {
    let (w, h) = (img.width(), img.height());
    let side = w.min(h);
    let cropped = img.crop_imm((w - side) / 2, (h - side) / 2, side, side);
    if side == size {
        cropped
    } else {
        match cropped {
            DynamicImage::ImageLuma8(buf) => {
                DynamicImage::ImageLuma8(imageops::resize(&buf, size, size, ResizeFilter::Triangle))
            }
            other => DynamicImage::ImageRgb8(imageops::resize(
                &other.to_rgb8(),
                size,
                size,
                ResizeFilter::Triangle,
            )),
        }
    }
}

/// Writes the grid as an 8-bit PNG, clamping to `[-1, 1]` first. Encoder
/// settings are fixed so identical grids give identical files.
pub fn save_png(img: &ImageGrid, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| image_err(path, e.into()))?;
    let encoder = PngEncoder::new_with_quality(
        BufWriter::new(file),
        CompressionType::Default,
        FilterType::Adaptive,
    );
    let color = if img.channels() == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    encoder
        .write_image(
            &img.to_bytes(),
            img.width() as u32,
            img.height() as u32,
            color,
        )
        .map_err(|e| image_err(path, e))
}

/// PNG files of a directory, sorted by path.
pub fn png_paths(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Result of loading a directory; undecodable files are listed, not fatal.
#[derive(Debug, Default)]
pub struct LoadedDir {
    pub images: Vec<ImageGrid>,
    pub paths: Vec<PathBuf>,
    pub skipped: Vec<(PathBuf, String)>,
}

/// Loads every PNG in `dir`. With `size`, images are center-cropped and
/// resized to `size x size`; `channels` forces gray or RGB, otherwise each
/// file keeps its natural channel count.
pub fn load_png_dir(dir: &Path, size: Option<u32>, channels: Option<usize>) -> Result<LoadedDir> {
    let paths = png_paths(dir).map_err(|e| image_err(dir, e.into()))?;
    let mut out = LoadedDir::default();
    for path in paths {
        let loaded = decode_png(&path).and_then(|img| {
            let c = channels.unwrap_or_else(|| natural_channels(&img));
            match size {
                Some(n) => grid_from_dynamic(&square_resize(&img, n), c),
                None => grid_from_dynamic(&img, c),
            }
        });
        match loaded {
            Ok(grid) => {
                out.images.push(grid);
                out.paths.push(path);
            }
            Err(e) => out.skipped.push((path, e.to_string())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrip_within_half_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = ImageGrid::from_fn(5, 7, 3, |c, i, j| {
            ((c * 31 + i * 7 + j * 5) % 17) as f64 / 8.5 - 1.0
        })
        .unwrap();
        save_png(&img, &path).unwrap();
        let back = load_png(&path).unwrap();
        assert_eq!(back.dims(), img.dims());
        assert!(back.max_abs_diff(&img) <= 1.0 / 255.0 + 1e-12);
    }

    #[test]
    fn crop_and_resize() {
        let img = DynamicImage::new_luma8(20, 12);
        let sq = square_resize(&img, 16);
        assert_eq!((sq.width(), sq.height()), (16, 16));
        assert_eq!(natural_channels(&sq), 1);
    }
}
