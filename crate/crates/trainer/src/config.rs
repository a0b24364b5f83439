//! Training configuration and its flat `key = value` text form.
//!
//! Blank lines and lines starting with `#` are ignored. Every key may appear
//! at most once; unknown keys are errors. [`TrainConfig::to_text`] writes all
//! keys in a fixed order, and parsing that text gives back the same config.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use freqgan_core::FreqOpKind;
use freqgan_nn::{AdamConfig, LossKind};

use crate::error::{Result, TrainError};

/// Which filter sites are active. Site (i) is reals entering D during the D
/// update, (ii) fakes entering D during the D update, (iii) fakes entering D
/// during the G update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Placement {
    RealOnly,
    FakeOnly,
    DisOnly,
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sites {
    pub real: bool,
    pub fake_d: bool,
    pub fake_g: bool,
}

impl Placement {
    pub const ALL: [Placement; 4] = [
        Placement::RealOnly,
        Placement::FakeOnly,
        Placement::DisOnly,
        Placement::All,
    ];

    pub fn sites(self) -> Sites {
        match self {
            Placement::RealOnly => Sites {
                real: true,
                ..Sites::default()
            },
            Placement::FakeOnly => Sites {
                fake_d: true,
                ..Sites::default()
            },
            Placement::DisOnly => Sites {
                real: true,
                fake_d: true,
                fake_g: false,
            },
            Placement::All => Sites {
                real: true,
                fake_d: true,
                fake_g: true,
            },
        }
    }

    /// Parses a comma-separated list such as `real_only,all`.
    pub fn parse_list(s: &str) -> std::result::Result<Vec<Placement>, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::RealOnly => "real_only",
            Placement::FakeOnly => "fake_only",
            Placement::DisOnly => "dis_only",
            Placement::All => "all",
        })
    }
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real_only" => Ok(Placement::RealOnly),
            "fake_only" => Ok(Placement::FakeOnly),
            "dis_only" => Ok(Placement::DisOnly),
            "all" => Ok(Placement::All),
            other => Err(format!(
                "unknown placement `{other}` (expected real_only|fake_only|dis_only|all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// Power-law Gaussian random fields plus random hard-edged rectangles.
    Synthetic {
        alpha: f64,
        edge_density: f64,
        size: usize,
    },
    /// Directory of PNGs, center-cropped and resized to `size`.
    Corpus { path: PathBuf, size: usize },
}

impl DatasetSpec {
    pub fn size(&self) -> usize {
        match self {
            DatasetSpec::Synthetic { size, .. } | DatasetSpec::Corpus { size, .. } => *size,
        }
    }
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Synthetic {
            alpha: 2.0,
            edge_density: 0.3,
            size: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub freq_op: FreqOpKind,
    pub radius: f64,
    pub placement: Placement,
    pub steps: usize,
    pub batch: usize,
    pub n_dis: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub latent_dim: usize,
    pub seed: u64,
    pub dataset: DatasetSpec,
    pub channels: usize,
    /// Images drawn from the synthetic generator (ignored for corpora).
    pub dataset_samples: usize,
    /// Base channel count of the generator/discriminator templates.
    pub width: usize,
    /// 0 writes only the final checkpoint.
    pub checkpoint_every: usize,
    /// Spectral normalization on the discriminator weights.
    pub spectral_norm: bool,
    /// Samples per side for the bias areas in the metrics log.
    pub eval_samples: usize,
    /// Samples per side for the final bias curve.
    pub bias_samples: usize,
    /// Generated PNGs written at the end of a run.
    pub export_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            loss: LossKind::Hinge,
            freq_op: FreqOpKind::None,
            radius: 4.0,
            placement: Placement::All,
            steps: 2000,
            batch: 32,
            n_dis: 1,
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            latent_dim: 32,
            seed: 0,
            dataset: DatasetSpec::default(),
            channels: 1,
            dataset_samples: 2048,
            width: 16,
            checkpoint_every: 500,
            spectral_norm: true,
            eval_samples: 256,
            bias_samples: 1000,
            export_samples: 16,
        }
    }
}

/// Recognised keys, in canonical order.
pub const KEYS: &[&str] = &[
    "loss",
    "freq_op",
    "radius",
    "placement",
    "steps",
    "batch",
    "n_dis",
    "lr",
    "beta1",
    "beta2",
    "latent_dim",
    "seed",
    "dataset",
    "alpha",
    "edge_density",
    "corpus_path",
    "size",
    "channels",
    "dataset_samples",
    "width",
    "checkpoint_every",
    "spectral_norm",
    "eval_samples",
    "bias_samples",
    "export_samples",
];

fn line_err(line: usize, message: impl Into<String>) -> TrainError {
    TrainError::ConfigLine {
        line,
        message: message.into(),
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| line_err(line, format!("`{key}`: cannot parse `{raw}`: {e}")))
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(line_err(
            line,
            format!("`{key}`: expected true or false, got `{raw}`"),
        )),
    }
}

impl TrainConfig {
    pub fn sites(&self) -> Sites {
        if self.freq_op == FreqOpKind::None {
            Sites::default()
        } else {
            self.placement.sites()
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            ..AdamConfig::default()
        }
    }

    pub fn size(&self) -> usize {
        self.dataset.size()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut dataset_kind = "synthetic".to_string();
        let mut alpha = None;
        let mut edge_density = None;
        let mut corpus_path = None;
        let mut size = None;

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, raw) = trimmed.split_once('=').ok_or_else(|| {
                line_err(line, format!("expected `key = value`, got `{trimmed}`"))
            })?;
            let (key, raw) = (key.trim(), raw.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                if key.starts_with("freq_op") || key.starts_with("radius") {
                    return Err(line_err(
                        line,
                        format!(
                            "`{key}`: one frequency operation and one radius apply to every active site; per-site settings are not allowed"
                        ),
                    ));
                }
                return Err(line_err(line, format!("unknown key `{key}`")));
            };
            if seen.contains(&known) {
                return Err(line_err(line, format!("duplicate key `{key}`")));
            }
            seen.push(known);
            match known {
                "loss" => cfg.loss = value(line, key, raw)?,
                "freq_op" => cfg.freq_op = value(line, key, raw)?,
                "radius" => cfg.radius = value(line, key, raw)?,
                "placement" => cfg.placement = value(line, key, raw)?,
                "steps" => cfg.steps = value(line, key, raw)?,
                "batch" => cfg.batch = value(line, key, raw)?,
                "n_dis" => cfg.n_dis = value(line, key, raw)?,
                "lr" => cfg.lr = value(line, key, raw)?,
                "beta1" => cfg.beta1 = value(line, key, raw)?,
                "beta2" => cfg.beta2 = value(line, key, raw)?,
                "latent_dim" => cfg.latent_dim = value(line, key, raw)?,
                "seed" => cfg.seed = value(line, key, raw)?,
                "dataset" => dataset_kind = raw.to_ascii_lowercase(),
                "alpha" => alpha = Some((line, value::<f64>(line, key, raw)?)),
                "edge_density" => edge_density = Some((line, value::<f64>(line, key, raw)?)),
                "corpus_path" => corpus_path = Some((line, PathBuf::from(raw))),
                "size" => size = Some(value::<usize>(line, key, raw)?),
                "channels" => cfg.channels = value(line, key, raw)?,
                "dataset_samples" => cfg.dataset_samples = value(line, key, raw)?,
                "width" => cfg.width = value(line, key, raw)?,
                "checkpoint_every" => cfg.checkpoint_every = value(line, key, raw)?,
                "spectral_norm" => cfg.spectral_norm = parse_bool(line, key, raw)?,
                "eval_samples" => cfg.eval_samples = value(line, key, raw)?,
                "bias_samples" => cfg.bias_samples = value(line, key, raw)?,
                "export_samples" => cfg.export_samples = value(line, key, raw)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        let default_size = cfg.dataset.size();
        cfg.dataset = match dataset_kind.as_str() {
            "synthetic" => {
                if let Some((line, _)) = corpus_path {
                    return Err(line_err(line, "`corpus_path` requires `dataset = corpus`"));
                }
                let (a0, e0) = match &cfg.dataset {
                    DatasetSpec::Synthetic {
                        alpha,
                        edge_density,
                        ..
                    } => (*alpha, *edge_density),
                    DatasetSpec::Corpus { .. } => unreachable!("default dataset is synthetic"),
                };
                DatasetSpec::Synthetic {
                    alpha: alpha.map_or(a0, |(_, v)| v),
                    edge_density: edge_density.map_or(e0, |(_, v)| v),
                    size: size.unwrap_or(default_size),
                }
            }
            "corpus" => {
                if let Some((line, _)) = alpha.or(edge_density) {
                    return Err(line_err(
                        line,
                        "`alpha` and `edge_density` only apply to `dataset = synthetic`",
                    ));
                }
                let (_, path) = corpus_path.ok_or_else(|| {
                    TrainError::Config("`dataset = corpus` needs `corpus_path`".into())
                })?;
                DatasetSpec::Corpus {
                    path,
                    size: size.unwrap_or(default_size),
                }
            }
            other => {
                return Err(TrainError::Config(format!(
                    "unknown dataset `{other}` (expected synthetic|corpus)"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.steps == 0 || self.batch == 0 || self.n_dis == 0 {
            return bad("steps, batch and n_dis must be at least 1".into());
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return bad(format!(
                "radius must be finite and >= 0, got {}",
                self.radius
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if self.latent_dim == 0 || self.width < 2 {
            return bad("latent_dim must be >= 1 and width >= 2".into());
        }
        if !matches!(self.channels, 1 | 3) {
            return bad(format!("channels must be 1 or 3, got {}", self.channels));
        }
        if self.eval_samples == 0 || self.bias_samples == 0 {
            return bad("eval_samples and bias_samples must be at least 1".into());
        }
        let size = self.size();
        if !matches!(size, 16 | 32) {
            return bad(format!("size must be 16 or 32, got {size}"));
        }
        if let DatasetSpec::Synthetic {
            alpha,
            edge_density,
            ..
        } = self.dataset
        {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return bad(format!("alpha must be finite and >= 0, got {alpha}"));
            }
            if !(edge_density.is_finite() && edge_density >= 0.0) {
                return bad(format!(
                    "edge_density must be finite and >= 0, got {edge_density}"
                ));
            }
            if self.dataset_samples == 0 {
                return bad("dataset_samples must be at least 1".into());
            }
        }
        Ok(())
    }

    /// Canonical text: every key, fixed order, floats in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(&str, String)> = vec![
            ("loss", self.loss.to_string()),
            ("freq_op", self.freq_op.to_string()),
            ("radius", format!("{:?}", self.radius)),
            ("placement", self.placement.to_string()),
            ("steps", self.steps.to_string()),
            ("batch", self.batch.to_string()),
            ("n_dis", self.n_dis.to_string()),
            ("lr", format!("{:?}", self.lr)),
            ("beta1", format!("{:?}", self.beta1)),
            ("beta2", format!("{:?}", self.beta2)),
            ("latent_dim", self.latent_dim.to_string()),
            ("seed", self.seed.to_string()),
        ];
        match &self.dataset {
            DatasetSpec::Synthetic {
                alpha,
                edge_density,
                size,
            } => {
                lines.push(("dataset", "synthetic".into()));
                lines.push(("alpha", format!("{alpha:?}")));
                lines.push(("edge_density", format!("{edge_density:?}")));
                lines.push(("size", size.to_string()));
            }
            DatasetSpec::Corpus { path, size } => {
                lines.push(("dataset", "corpus".into()));
                lines.push(("corpus_path", path.display().to_string()));
                lines.push(("size", size.to_string()));
            }
        }
        lines.extend([
            ("channels", self.channels.to_string()),
            ("dataset_samples", self.dataset_samples.to_string()),
            ("width", self.width.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("spectral_norm", self.spectral_norm.to_string()),
            ("eval_samples", self.eval_samples.to_string()),
            ("bias_samples", self.bias_samples.to_string()),
            ("export_samples", self.export_samples.to_string()),
        ]);
        lines
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
