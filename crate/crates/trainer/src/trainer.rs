//! The alternating D/G loop with frequency operators at the discriminator input.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use freqgan_core::io::save_png;
use freqgan_core::{hfc_batch, low_pass, low_pass_backward, FreqOpKind, ImageGrid};
use freqgan_nn::{Adam, Checkpoint, Network, NnError, Tensor};
use freqgan_probe::{
    bias_area, bias_curve, fmt_f64, images_to_tensor, tensor_to_images, write_curve_csv, BiasCurve,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::TrainConfig;
use crate::dataset::make_dataset;
use crate::error::{Result, TrainError};
use crate::models::{discriminator_specs, generator_specs};
use crate::seed::derive_seed;

pub const METRICS_EVERY: usize = 50;
pub const METRICS_HEADER: &str =
    "step,d_loss,g_loss,d_real_mean,d_fake_mean,bias_area_low,bias_area_full";

const HFC_D_STREAM: u64 = 1;
const HFC_G_STREAM: u64 = 2;
const DONOR_STREAM: u64 = 3;
const EVAL_STREAM: u64 = 4;
const DATA_SEED_STREAM: u64 = 5;
const EVAL_CHUNK: usize = 128;

/// Hooks for inspecting what the discriminator sees. All methods default to
/// doing nothing.
pub trait TrainObserver {
    /// Batches entering D during a D update, after any frequency operation.
    fn discriminator_inputs(&mut self, _step: usize, _reals: &[ImageGrid], _fakes: &[ImageGrid]) {}

    /// During a G update: the input recorded on D's tape, the gradient of the
    /// generator loss w.r.t. that input, and the gradient handed to G.
    fn generator_path(
        &mut self,
        _step: usize,
        _d_input: &Tensor,
        _input_grad: &Tensor,
        _generator_grad: &Tensor,
    ) {
    }
}

pub struct NoObserver;

impl TrainObserver for NoObserver {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DStepStats {
    pub loss: f64,
    pub real_mean: f64,
    pub fake_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub step: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub d_real_mean: f64,
    pub d_fake_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub stats: StepStats,
    pub bias_area_low: f64,
    pub bias_area_full: f64,
}

impl MetricsRow {
    pub fn csv_line(&self) -> String {
        let s = &self.stats;
        format!(
            "{},{},{},{},{},{},{}",
            s.step,
            fmt_f64(s.d_loss),
            fmt_f64(s.g_loss),
            fmt_f64(s.d_real_mean),
            fmt_f64(s.d_fake_mean),
            fmt_f64(self.bias_area_low),
            fmt_f64(self.bias_area_full)
        )
    }
}

fn non_finite(step: usize, what: impl Into<String>) -> TrainError {
    TrainError::NonFinite {
        step,
        what: what.into(),
        last_checkpoint: None,
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Horizon of the low-frequency bias area: bins `<= N / 4`.
pub fn low_horizon(size: usize) -> f64 {
    size as f64 / 4.0
}

pub struct Trainer {
    config: TrainConfig,
    data: Vec<ImageGrid>,
    g: Network,
    d: Network,
    g_opt: Adam,
    d_opt: Adam,
    rng: ChaCha8Rng,
    step: usize,
    d_calls: u64,
    g_calls: u64,
}

impl Trainer {
    /// Builds the dataset and the template networks.
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let data = make_dataset(
            &config.dataset,
            config.channels,
            config.dataset_samples,
            derive_seed(config.seed, 0, DATA_SEED_STREAM),
        )?;
        Self::with_dataset(config, data)
    }

    pub fn with_dataset(config: TrainConfig, data: Vec<ImageGrid>) -> Result<Self> {
        config.validate()?;
        let size = config.size();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let g = Network::new(
            &[config.latent_dim],
            &generator_specs(config.latent_dim, size, config.channels, config.width),
            &mut rng,
        )?;
        let mut d = Network::new(
            &[config.channels, size, size],
            &discriminator_specs(size, config.channels, config.width),
            &mut rng,
        )?;
        if config.spectral_norm {
            d = d.with_spectral_norm(&mut rng);
        }
        Self::assemble(config, data, g, d, rng)
    }

    /// Uses caller-supplied networks; the config's architecture keys are
    /// ignored but everything else applies.
    pub fn from_parts(
        config: TrainConfig,
        data: Vec<ImageGrid>,
        g: Network,
        d: Network,
    ) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::assemble(config, data, g, d, rng)
    }

    fn assemble(
        config: TrainConfig,
        data: Vec<ImageGrid>,
        g: Network,
        d: Network,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if config.steps == 0 || config.batch == 0 || config.n_dis == 0 {
            return Err(TrainError::Config(
                "steps, batch and n_dis must be at least 1".into(),
            ));
        }
        let first = data
            .first()
            .ok_or_else(|| TrainError::Data("dataset is empty".into()))?;
        let (h, w, c) = first.dims();
        if let Some(bad) = data.iter().find(|x| x.dims() != (h, w, c)) {
            return Err(TrainError::Data(format!(
                "dataset mixes shapes {:?} and {:?}",
                (h, w, c),
                bad.dims()
            )));
        }
        if g.input_shape() != [config.latent_dim] {
            return Err(TrainError::Config(format!(
                "generator takes {:?}, latent_dim is {}",
                g.input_shape(),
                config.latent_dim
            )));
        }
        if g.output_shape() != [c, h, w] || d.input_shape() != [c, h, w] {
            return Err(TrainError::Data(format!(
                "images are {c}x{h}x{w} but G produces {:?} and D expects {:?}",
                g.output_shape(),
                d.input_shape()
            )));
        }
        if d.output_shape() != [1] {
            return Err(TrainError::Config(format!(
                "discriminator must output one logit, got {:?}",
                d.output_shape()
            )));
        }
        let adam = config.adam();
        Ok(Self {
            g_opt: Adam::new(&g, adam),
            d_opt: Adam::new(&d, adam),
            config,
            data,
            g,
            d,
            rng,
            step: 0,
            d_calls: 0,
            g_calls: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn generator(&self) -> &Network {
        &self.g
    }

    pub fn discriminator(&self) -> &Network {
        &self.d
    }

    pub fn dataset(&self) -> &[ImageGrid] {
        &self.data
    }

    /// Completed training steps.
    pub fn steps_done(&self) -> usize {
        self.step
    }

    /// Total Adam updates across both networks.
    pub fn optimizer_invocations(&self) -> u64 {
        self.d_opt.invocations() + self.g_opt.invocations()
    }

    fn sample_latents(&mut self, n: usize) -> Tensor {
        let dim = self.config.latent_dim;
        let data = (0..n * dim)
            .map(|_| self.rng.sample(StandardNormal))
            .collect();
        Tensor::new(vec![n, dim], data).expect("latent shape")
    }

    fn sample_reals(&mut self, n: usize) -> Vec<ImageGrid> {
        (0..n)
            .map(|_| self.data[self.rng.random_range(0..self.data.len())].clone())
            .collect()
    }

    fn low_pass_all(&self, images: Vec<ImageGrid>) -> Result<Vec<ImageGrid>> {
        images
            .iter()
            .map(|x| Ok(low_pass(x, self.config.radius)?))
            .collect()
    }

    /// Sites (i) and (ii).
    fn filter_d_inputs(
        &self,
        reals: Vec<ImageGrid>,
        fakes: Vec<ImageGrid>,
        pairing_seed: u64,
    ) -> Result<(Vec<ImageGrid>, Vec<ImageGrid>)> {
        let sites = self.config.sites();
        match self.config.freq_op {
            FreqOpKind::None => Ok((reals, fakes)),
            FreqOpKind::Hff => {
                let reals = if sites.real {
                    self.low_pass_all(reals)?
                } else {
                    reals
                };
                let fakes = if sites.fake_d {
                    self.low_pass_all(fakes)?
                } else {
                    fakes
                };
                Ok((reals, fakes))
            }
            FreqOpKind::Hfc => {
                let fakes = if sites.fake_d {
                    hfc_batch(&reals, &fakes, self.config.radius, pairing_seed)?.1
                } else {
                    fakes
                };
                Ok((reals, fakes))
            }
        }
    }

    /// Site (iii), applied to the generator's batch during the G update.
    fn filter_g_input(&self, fakes: Vec<ImageGrid>) -> Result<Vec<ImageGrid>> {
        if !self.config.sites().fake_g {
            return Ok(fakes);
        }
        match self.config.freq_op {
            FreqOpKind::None => Ok(fakes),
            FreqOpKind::Hff => self.low_pass_all(fakes),
            FreqOpKind::Hfc => {
                let mut donor_rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    self.config.seed,
                    self.g_calls,
                    DONOR_STREAM,
                ));
                let donors: Vec<ImageGrid> = (0..fakes.len())
                    .map(|_| self.data[donor_rng.random_range(0..self.data.len())].clone())
                    .collect();
                let seed = derive_seed(self.config.seed, self.g_calls, HFC_G_STREAM);
                Ok(hfc_batch(&donors, &fakes, self.config.radius, seed)?.1)
            }
        }
    }

    /// One discriminator update.
    pub fn d_step(&mut self, observer: &mut dyn TrainObserver) -> Result<DStepStats> {
        let step = self.step + 1;
        let batch = self.config.batch;
        self.d_calls += 1;
        let reals = self.sample_reals(batch);
        let z = self.sample_latents(batch);
        if self.config.spectral_norm {
            self.d.power_iterate(1);
        }
        let fakes = tensor_to_images(&self.g.predict(&z)?)?;
        let seed = derive_seed(self.config.seed, self.d_calls, HFC_D_STREAM);
        let (reals, fakes) = self.filter_d_inputs(reals, fakes, seed)?;
        observer.discriminator_inputs(step, &reals, &fakes);

        self.d.zero_grad();
        let (yr, tape_r) = self.d.forward(&images_to_tensor(&reals)?)?;
        let (yf, tape_f) = self.d.forward(&images_to_tensor(&fakes)?)?;
        let (loss, gr, gf) = self.config.loss.discriminator_loss(yr.data(), yf.data());
        if !loss.is_finite() {
            return Err(non_finite(step, "discriminator loss"));
        }
        self.d
            .backward(&tape_r, &Tensor::new(yr.shape().to_vec(), gr)?)?;
        self.d
            .backward(&tape_f, &Tensor::new(yf.shape().to_vec(), gf)?)?;
        self.d_opt.step(&mut self.d)?;
        Ok(DStepStats {
            loss,
            real_mean: mean(yr.data()),
            fake_mean: mean(yf.data()),
        })
    }

    /// One generator update; returns the generator loss.
    pub fn g_step(&mut self, observer: &mut dyn TrainObserver) -> Result<f64> {
        let step = self.step + 1;
        self.g_calls += 1;
        let z = self.sample_latents(self.config.batch);
        self.g.zero_grad();
        let (out, g_tape) = self.g.forward(&z)?;
        let fakes = self.filter_g_input(tensor_to_images(&out)?)?;
        let d_in = images_to_tensor(&fakes)?;
        let (y, d_tape) = self.d.forward(&d_in)?;
        let (loss, gy) = self.config.loss.generator_objective(y.data());
        if !loss.is_finite() {
            return Err(non_finite(step, "generator loss"));
        }
        let input_grad = self
            .d
            .input_gradient(&d_tape, &Tensor::new(y.shape().to_vec(), gy)?)?;
        let g_grad = if self.config.sites().fake_g {
            let filtered = tensor_to_images(&input_grad)?
                .iter()
                .map(|gi| Ok(low_pass_backward(gi, self.config.radius)?))
                .collect::<Result<Vec<_>>>()?;
            images_to_tensor(&filtered)?
        } else {
            input_grad.clone()
        };
        let recorded = if d_tape.is_empty() {
            &d_in
        } else {
            d_tape.layer_input(0)
        };
        observer.generator_path(step, recorded, &input_grad, &g_grad);
        self.g
            .backward(&g_tape, &g_grad.reshaped(out.shape().to_vec())?)?;
        self.g_opt.step(&mut self.g)?;
        Ok(loss)
    }

    /// `n_dis` discriminator updates followed by one generator update.
    pub fn train_step(&mut self, observer: &mut dyn TrainObserver) -> Result<StepStats> {
        let mut last = None;
        for _ in 0..self.config.n_dis {
            last = Some(self.d_step(observer)?);
        }
        let d = last.expect("n_dis >= 1");
        let g_loss = self.g_step(observer)?;
        self.step += 1;
        Ok(StepStats {
            step: self.step,
            d_loss: d.loss,
            g_loss,
            d_real_mean: d.real_mean,
            d_fake_mean: d.fake_mean,
        })
    }

    /// Generator outputs for `n` fixed evaluation latents.
    pub fn eval_samples(&self, n: usize) -> Result<Vec<ImageGrid>> {
        let dim = self.config.latent_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, 0, EVAL_STREAM));
        let latents: Vec<f64> = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = Vec::with_capacity(n);
        for chunk in latents.chunks(EVAL_CHUNK * dim) {
            let z = Tensor::new(vec![chunk.len() / dim, dim], chunk.to_vec())?;
            out.extend(tensor_to_images(&self.g.predict(&z)?)?);
        }
        Ok(out)
    }

    /// Bias curve between the first `n` dataset images and `n` generated ones.
    pub fn eval_bias(&self, n: usize) -> Result<BiasCurve> {
        let reals = &self.data[..n.min(self.data.len())];
        Ok(bias_curve(reals, &self.eval_samples(n)?)?)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ckpt = Checkpoint::new();
        ckpt.set_meta("step", self.step.to_string());
        ckpt.set_meta("seed", self.config.seed.to_string());
        self.g.write_checkpoint("G", &mut ckpt);
        self.d.write_checkpoint("D", &mut ckpt);
        ckpt
    }
}

/// Final numbers of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub d_real_mean: f64,
    pub d_fake_mean: f64,
    /// From the final bias curve, bins `<= N / 4`.
    pub bias_area_low: f64,
    /// From the final bias curve, all bins.
    pub bias_area_full: f64,
    pub optimizer_invocations: u64,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        format!(
            "steps = {}\nd_loss = {}\ng_loss = {}\nd_real_mean = {}\nd_fake_mean = {}\nbias_area_low = {}\nbias_area_full = {}\noptimizer_invocations = {}\n",
            self.steps,
            fmt_f64(self.d_loss),
            fmt_f64(self.g_loss),
            fmt_f64(self.d_real_mean),
            fmt_f64(self.d_fake_mean),
            fmt_f64(self.bias_area_low),
            fmt_f64(self.bias_area_full),
            self.optimizer_invocations
        )
    }
}

/// Files written by [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub config_echo: PathBuf,
    pub metrics: PathBuf,
    /// Scheduled checkpoints followed by the final one.
    pub checkpoints: Vec<PathBuf>,
    pub bias_curve: PathBuf,
    pub summary_file: PathBuf,
    pub samples: Vec<PathBuf>,
    pub final_curve: BiasCurve,
    pub summary: RunSummary,
}

impl RunArtifacts {
    pub fn final_checkpoint(&self) -> &Path {
        self.checkpoints
            .last()
            .expect("final checkpoint is always written")
    }
}

fn is_non_finite(e: &TrainError) -> Option<String> {
    match e {
        TrainError::NonFinite { what, .. } => Some(what.clone()),
        TrainError::Nn(NnError::NonFinite { layer, spec }) => {
            Some(format!("activation of layer {layer} ({spec})"))
        }
        _ => None,
    }
}

pub fn train(config: &TrainConfig, out_dir: &Path) -> Result<RunArtifacts> {
    train_observed(config, out_dir, &mut NoObserver)
}

/// Runs `config.steps` steps, writing the config echo, metrics log,
/// checkpoints, final bias curve, sample PNGs and a summary under `out_dir`.
pub fn train_observed(
    config: &TrainConfig,
    out_dir: &Path,
    observer: &mut dyn TrainObserver,
) -> Result<RunArtifacts> {
    config.validate()?;
    let trainer = Trainer::new(config.clone())?;
    run(trainer, out_dir, observer)
}

/// Drives an existing trainer to `config.steps` and writes the artifacts.
pub fn run(
    mut trainer: Trainer,
    out_dir: &Path,
    observer: &mut dyn TrainObserver,
) -> Result<RunArtifacts> {
    let config = trainer.config().clone();
    fs::create_dir_all(out_dir)?;
    let ckpt_dir = out_dir.join("checkpoints");
    fs::create_dir_all(&ckpt_dir)?;

    let config_echo = out_dir.join("config.txt");
    fs::write(&config_echo, config.to_text())?;

    let metrics_path = out_dir.join("metrics.csv");
    let mut metrics = BufWriter::new(File::create(&metrics_path)?);
    writeln!(metrics, "{METRICS_HEADER}")?;
    metrics.flush()?;

    let low = low_horizon(config.size());
    let mut checkpoints = Vec::new();
    let mut last = None;
    for s in 1..=config.steps {
        let stats = match trainer.train_step(observer) {
            Ok(stats) => stats,
            Err(e) => {
                metrics.flush()?;
                return Err(match is_non_finite(&e) {
                    Some(what) => TrainError::NonFinite {
                        step: s,
                        what,
                        last_checkpoint: checkpoints.last().cloned(),
                    },
                    None => e,
                });
            }
        };
        if s % METRICS_EVERY == 0 || s == config.steps {
            let curve = trainer.eval_bias(config.eval_samples)?;
            let row = MetricsRow {
                stats,
                bias_area_low: bias_area(&curve, low),
                bias_area_full: bias_area(&curve, f64::INFINITY),
            };
            writeln!(metrics, "{}", row.csv_line())?;
            metrics.flush()?;
        }
        if config.checkpoint_every > 0 && s % config.checkpoint_every == 0 && s != config.steps {
            let path = ckpt_dir.join(format!("step_{s:06}.ckpt"));
            trainer.checkpoint().save(&path)?;
            checkpoints.push(path);
        }
        last = Some(stats);
    }
    drop(metrics);
    let stats = last.expect("steps >= 1");

    let final_path = ckpt_dir.join("final.ckpt");
    trainer.checkpoint().save(&final_path)?;
    checkpoints.push(final_path);

    let final_curve = trainer.eval_bias(config.bias_samples)?;
    let bias_path = out_dir.join("bias_curve.csv");
    write_curve_csv(&final_curve, &bias_path)?;

    let mut samples = Vec::new();
    if config.export_samples > 0 {
        let dir = out_dir.join("samples");
        fs::create_dir_all(&dir)?;
        for (k, img) in trainer
            .eval_samples(config.export_samples)?
            .iter()
            .enumerate()
        {
            let path = dir.join(format!("sample_{k:04}.png"));
            save_png(img, &path)?;
            samples.push(path);
        }
    }

    let summary = RunSummary {
        steps: config.steps,
        d_loss: stats.d_loss,
        g_loss: stats.g_loss,
        d_real_mean: stats.d_real_mean,
        d_fake_mean: stats.d_fake_mean,
        bias_area_low: bias_area(&final_curve, low),
        bias_area_full: bias_area(&final_curve, f64::INFINITY),
        optimizer_invocations: trainer.optimizer_invocations(),
    };
    let summary_file = out_dir.join("summary.txt");
    fs::write(&summary_file, summary.to_text())?;

    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        config_echo,
        metrics: metrics_path,
        checkpoints,
        bias_curve: bias_path,
        summary_file,
        samples,
        final_curve,
        summary,
    })
}
