//! CSV exports. Floats use Rust's shortest round-trip formatting with a `.`
//! decimal separator, independent of locale.

use std::path::Path;

use freqgan_core::{PowerSpectrum, RadialProfile};

use crate::bias::BiasCurve;
use crate::components::ProbeRow;
use crate::error::Result;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_probe_csv(rows: &[ProbeRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "radius",
        "mean_full",
        "mean_low",
        "mean_same_mix",
        "mean_cross_mix",
        "mean_high",
        "samples",
    ])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.radius),
            fmt_f64(r.mean_full),
            fmt_f64(r.mean_low),
            fmt_f64(r.mean_same_mix),
            fmt_f64(r.mean_cross_mix),
            fmt_f64(r.mean_high),
            r.samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv(profile: &RadialProfile, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin", "power_db", "count"])?;
    for (b, (v, n)) in profile.bins.iter().zip(&profile.counts).enumerate() {
        w.write_record([b.to_string(), fmt_f64(*v), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv(curve: &BiasCurve, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin", "bias_db"])?;
    for (b, v) in curve.bins.iter().enumerate() {
        w.write_record([b.to_string(), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// One line per pixel, row-major, centered indices.
pub fn write_power_spectrum_csv(ps: &PowerSpectrum, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row", "col", "power_db"])?;
    for i in 0..ps.height {
        for j in 0..ps.width {
            w.write_record([i.to_string(), j.to_string(), fmt_f64(ps.get(i, j))])?;
        }
    }
    w.flush()?;
    Ok(())
}
