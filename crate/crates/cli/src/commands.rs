use std::fs;
use std::path::Path;

use freqgan_core::io::{load_png, load_png_dir, save_png, LoadedDir};
use freqgan_core::{dft2, high_pass, low_pass, power_spectrum, ImageGrid};
use freqgan_nn::{Checkpoint, Network};
use freqgan_probe::{
    bias_curve, corpus_rps, fmt_f64, plot_lines, probe_components, scaled_radii, write_curve_csv,
    write_power_spectrum_csv, write_probe_csv, write_profile_csv, Series,
};
use freqgan_train::{
    make_synthetic_dataset, placement_experiment, DatasetSpec, Placement, TrainConfig,
};

use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius >= 0.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "--radius must be a finite number >= 0, got {radius}"
        )))
    }
}

fn existing_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::missing(path))
    }
}

fn existing_dir(path: &Path) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::new(
            "input",
            format!("{} is not a directory", path.display()),
        ))
    }
}

fn parent_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => Ok(fs::create_dir_all(p)?),
        _ => Ok(()),
    }
}

fn parse_radii(list: &str) -> Result<Vec<f64>> {
    let radii = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad radius '{s}' in --radii")))
        })
        .collect::<Result<Vec<_>>>()?;
    if radii.is_empty() {
        return Err(CliError::usage("--radii is empty"));
    }
    Ok(radii)
}

fn load_dir(dir: &Path, size: Option<u32>, channels: Option<usize>) -> Result<Vec<ImageGrid>> {
    let LoadedDir {
        images, skipped, ..
    } = load_png_dir(dir, size, channels)?;
    for (path, reason) in &skipped {
        log::warn!("skipping {}: {reason}", path.display());
    }
    if images.is_empty() {
        return Err(CliError::new(
            "data",
            format!("no readable PNGs in {}", dir.display()),
        ));
    }
    Ok(images)
}

fn read_config(path: &Path) -> Result<TrainConfig> {
    existing_file(path)?;
    let cfg = TrainConfig::parse(&fs::read_to_string(path)?)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn synth(
    alpha: f64,
    edges: f64,
    n: usize,
    size: usize,
    channels: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(CliError::usage(format!(
            "--alpha must be >= 0, got {alpha}"
        )));
    }
    if !(edges.is_finite() && edges >= 0.0) {
        return Err(CliError::usage(format!(
            "--edges must be >= 0, got {edges}"
        )));
    }
    if n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    if size < 4 {
        return Err(CliError::usage(format!(
            "--size must be at least 4, got {size}"
        )));
    }
    if channels != 1 && channels != 3 {
        return Err(CliError::usage(format!(
            "--channels must be 1 or 3, got {channels}"
        )));
    }
    let spec = DatasetSpec::Synthetic {
        alpha,
        edge_density: edges,
        size,
    };
    let images = make_synthetic_dataset(&spec, channels, n, seed)?;
    fs::create_dir_all(out)?;
    for (k, img) in images.iter().enumerate() {
        save_png(img, &out.join(format!("synth_{k:05}.png")))?;
    }
    log::info!("wrote {n} images to {}", out.display());
    Ok(())
}

pub fn decompose(input: &Path, radius: f64, out: &Path) -> Result<()> {
    check_radius(radius)?;
    existing_file(input)?;
    let x = load_png(input)?;
    let low = low_pass(&x, radius)?;
    let high = high_pass(&x, radius)?;
    fs::create_dir_all(out)?;
    save_png(&low, &out.join("low.png"))?;
    save_png(&high, &out.join("high.png"))?;
    let clamped = [&low, &high]
        .iter()
        .any(|g| g.min_value() < -1.0 || g.max_value() > 1.0);
    let ranges = format!(
        "radius = {}\nlow_min = {}\nlow_max = {}\nhigh_min = {}\nhigh_max = {}\nclamped = {clamped}\n",
        fmt_f64(radius),
        fmt_f64(low.min_value()),
        fmt_f64(low.max_value()),
        fmt_f64(high.min_value()),
        fmt_f64(high.max_value()),
    );
    fs::write(out.join("ranges.txt"), ranges)?;
    if clamped {
        log::warn!("band values left [-1, 1]; the PNGs are clamped, see ranges.txt");
    }
    Ok(())
}

pub fn mix(low: &Path, high: &Path, radius: f64, out: &Path) -> Result<()> {
    check_radius(radius)?;
    existing_file(low)?;
    existing_file(high)?;
    let a = load_png(low)?;
    let b = load_png(high)?;
    if !a.same_shape(&b) {
        return Err(CliError::new(
            "data",
            format!("shape mismatch: {:?} vs {:?}", a.dims(), b.dims()),
        ));
    }
    let mixed = freqgan_core::mix(&a, &b, radius)?;
    parent_dir(out)?;
    save_png(&mixed, out)?;
    Ok(())
}

pub fn spectrum(input: &Path, out: &Path) -> Result<()> {
    existing_file(input)?;
    let ps = power_spectrum(&dft2(&load_png(input)?)?);
    parent_dir(out)?;
    write_power_spectrum_csv(&ps, out)?;
    Ok(())
}

pub fn rps(input: &Path, out: &Path) -> Result<()> {
    existing_dir(input)?;
    let profile = corpus_rps(&load_dir(input, None, None)?)?;
    parent_dir(out)?;
    write_profile_csv(&profile, out)?;
    Ok(())
}

pub fn bias(real: &Path, fake: &Path, out: &Path, plot: Option<&Path>) -> Result<()> {
    existing_dir(real)?;
    existing_dir(fake)?;
    let curve = bias_curve(&load_dir(real, None, None)?, &load_dir(fake, None, None)?)?;
    parent_dir(out)?;
    write_curve_csv(&curve, out)?;
    if let Some(path) = plot {
        parent_dir(path)?;
        plot_lines(
            &[Series::new("real - fake", curve.bins.clone())],
            "RPS bias",
            "radius",
            "dB",
            path,
        )?;
    }
    Ok(())
}

pub fn train(config: &Path, out: &Path) -> Result<()> {
    let cfg = read_config(config)?;
    let artifacts = freqgan_train::train(&cfg, out)?;
    log::info!(
        "run finished, summary at {}",
        artifacts.summary_file.display()
    );
    Ok(())
}

pub fn probe(
    checkpoint: &Path,
    primary: &Path,
    donor: &Path,
    radii: Option<&str>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let radii = radii.map(parse_radii).transpose()?;
    if let Some(r) = radii
        .as_ref()
        .and_then(|r| r.iter().find(|r| !(r.is_finite() && **r >= 0.0)))
    {
        return Err(CliError::usage(format!("radii must be >= 0, got {r}")));
    }
    existing_file(checkpoint)?;
    existing_dir(primary)?;
    existing_dir(donor)?;
    let d = Network::read_checkpoint("D", &Checkpoint::load(checkpoint)?)?;
    let &[c, h, w] = d.input_shape() else {
        return Err(CliError::new(
            "input",
            format!(
                "discriminator input shape {:?} is not [C, H, W]",
                d.input_shape()
            ),
        ));
    };
    if h != w {
        return Err(CliError::new(
            "input",
            format!("discriminator expects {h}x{w} images"),
        ));
    }
    let primary = load_dir(primary, Some(h as u32), Some(c))?;
    let donor = load_dir(donor, Some(h as u32), Some(c))?;
    let radii = radii.unwrap_or_else(|| scaled_radii(h));
    let rows = probe_components(&d, &primary, &donor, &radii, seed)?;
    parent_dir(out)?;
    write_probe_csv(&rows, out)?;
    Ok(())
}

pub fn experiment(config: &Path, radii: &str, placements: &str, out: &Path) -> Result<()> {
    let radii = parse_radii(radii)?;
    let placements = Placement::parse_list(placements).map_err(CliError::usage)?;
    let cfg = read_config(config)?;
    parent_dir(out)?;
    let report = placement_experiment(&cfg, &radii, &placements, out)?;
    let failed = report.rows.iter().filter(|r| r.outcome.is_err()).count();
    log::info!(
        "{} cells, {failed} failed; summary at {}",
        report.rows.len(),
        report.summary.display()
    );
    Ok(())
}
