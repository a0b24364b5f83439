//! Grid of training runs over (radius, placement) plus an unfiltered baseline.
//!
//! Quality is summarised by radial-power-spectrum bias areas rather than an
//! Inception-based score.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use freqgan_core::FreqOpKind;
use freqgan_probe::fmt_f64;

use crate::config::{Placement, TrainConfig};
use crate::error::Result;
use crate::trainer::{train, RunSummary};

pub const EXPERIMENT_HEADER: [&str; 9] = [
    "placement",
    "radius",
    "status",
    "bias_area_low",
    "bias_area_full",
    "d_loss",
    "g_loss",
    "seed",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    /// `None` for the baseline.
    pub placement: Option<Placement>,
    /// Infinite for the baseline.
    pub radius: f64,
    pub seed: u64,
    pub outcome: std::result::Result<RunSummary, String>,
}

impl ExperimentRow {
    pub fn label(&self) -> String {
        self.placement
            .map_or_else(|| "baseline".to_string(), |p| p.to_string())
    }

    pub fn record(&self) -> Vec<String> {
        let mut rec = vec![self.label(), fmt_f64(self.radius)];
        match &self.outcome {
            Ok(s) => rec.extend([
                "ok".to_string(),
                fmt_f64(s.bias_area_low),
                fmt_f64(s.bias_area_full),
                fmt_f64(s.d_loss),
                fmt_f64(s.g_loss),
                self.seed.to_string(),
                String::new(),
            ]),
            Err(e) => rec.extend([
                "failed".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                self.seed.to_string(),
                e.replace(['\n', '\r'], " "),
            ]),
        }
        rec
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub runs_dir: PathBuf,
}

/// Config of one grid cell. An unset frequency operation defaults to HFF.
pub fn cell_config(base: &TrainConfig, radius: f64, placement: Placement) -> TrainConfig {
    TrainConfig {
        freq_op: match base.freq_op {
            FreqOpKind::None => FreqOpKind::Hff,
            op => op,
        },
        radius,
        placement,
        ..base.clone()
    }
}

fn baseline_config(base: &TrainConfig) -> TrainConfig {
    TrainConfig {
        freq_op: FreqOpKind::None,
        ..base.clone()
    }
}

/// Runs the baseline, then every (radius, placement) cell in that order.
/// Failed runs become `status = failed` rows. Writes the CSV to `csv_path`,
/// a text summary next to it and each run's artifacts under `<stem>_runs/`.
pub fn placement_experiment(
    base: &TrainConfig,
    radii: &[f64],
    placements: &[Placement],
    csv_path: &Path,
) -> Result<ExperimentReport> {
    base.validate()?;
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    let parent = csv_path.parent().unwrap_or(Path::new("."));
    let runs_dir = parent.join(format!("{stem}_runs"));
    fs::create_dir_all(&runs_dir)?;

    let mut rows = Vec::new();
    let run_cell = |cfg: &TrainConfig, name: String| -> std::result::Result<RunSummary, String> {
        match train(cfg, &runs_dir.join(name)) {
            Ok(a) => Ok(a.summary),
            Err(e) => {
                log::warn!("run failed: {e}");
                Err(e.to_string())
            }
        }
    };

    rows.push(ExperimentRow {
        placement: None,
        radius: f64::INFINITY,
        seed: base.seed,
        outcome: run_cell(&baseline_config(base), "baseline".into()),
    });
    for &r in radii {
        for &p in placements {
            let cfg = cell_config(base, r, p);
            let outcome = cfg
                .validate()
                .map_err(|e| e.to_string())
                .and_then(|_| run_cell(&cfg, format!("{p}_r{r}")));
            rows.push(ExperimentRow {
                placement: Some(p),
                radius: r,
                seed: base.seed,
                outcome,
            });
        }
    }

    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(EXPERIMENT_HEADER)?;
    for row in &rows {
        w.write_record(row.record())?;
    }
    w.flush()?;

    let summary = parent.join(format!("{stem}_summary.txt"));
    fs::write(&summary, summary_text(base, &rows))?;
    Ok(ExperimentReport {
        rows,
        csv: csv_path.to_path_buf(),
        summary,
        runs_dir,
    })
}

fn summary_text(base: &TrainConfig, rows: &[ExperimentRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# placement experiment: freq_op={} loss={} steps={} size={} seed={}",
        cell_config(base, 0.0, Placement::All).freq_op,
        base.loss,
        base.steps,
        base.size(),
        base.seed
    );
    let _ = writeln!(
        out,
        "# bias_area_low sums |real - fake| radial power (dB) over bins <= N/4; bias_area_full over all bins. Not FID."
    );
    let baseline = rows.first().and_then(|r| r.outcome.as_ref().ok());
    for row in rows {
        let label = format!("{:<10} R={:<6}", row.label(), fmt_f64(row.radius));
        match (&row.outcome, baseline) {
            (Err(e), _) => {
                let _ = writeln!(out, "{label} FAILED: {e}");
            }
            (Ok(s), Some(b)) if row.placement.is_some() => {
                let cmp = |x: f64, y: f64| {
                    if x < y {
                        "below"
                    } else if x > y {
                        "above"
                    } else {
                        "equal to"
                    }
                };
                let _ = writeln!(
                    out,
                    "{label} low {:.3} ({} baseline {:.3}), full {:.3} ({} baseline {:.3})",
                    s.bias_area_low,
                    cmp(s.bias_area_low, b.bias_area_low),
                    b.bias_area_low,
                    s.bias_area_full,
                    cmp(s.bias_area_full, b.bias_area_full),
                    b.bias_area_full
                );
            }
            (Ok(s), _) => {
                let _ = writeln!(
                    out,
                    "{label} low {:.3}, full {:.3}",
                    s.bias_area_low, s.bias_area_full
                );
            }
        }
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.outcome.is_err())
        .map(|r| format!("{} R={}", r.label(), fmt_f64(r.radius)))
        .collect();
    let _ = writeln!(
        out,
        "failed cells: {}",
        if failed.is_empty() {
            "none".to_string()
        } else {
            failed.join(", ")
        }
    );
    out
}
