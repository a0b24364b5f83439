//! `freqgan` command line. Every failure prints one line
//! `error: <kind>: <message>` to stderr and exits nonzero.

mod commands;
mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "freqgan",
    version,
    about = "Frequency-domain tools for GAN images and training"
)]
struct Cli {
    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic power-law corpus as PNGs.
    Synth {
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Expected rectangles per 64 pixels.
        #[arg(long, default_value_t = 0.3)]
        edges: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split an image into low.png and high.png at radius R.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Low band of one image plus high band of another.
    Mix {
        #[arg(long)]
        low: PathBuf,
        #[arg(long)]
        high: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Centered dB power spectrum of one image as CSV.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean radial power spectrum of a PNG directory as CSV.
    Rps {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Real-minus-fake radial power spectrum curve.
    Bias {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        fake: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Train a GAN from a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discriminator response to band-limited and band-swapped images.
    Probe {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        primary: PathBuf,
        #[arg(long)]
        donor: PathBuf,
        /// Comma-separated; defaults to the standard radii scaled to the image size.
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Baseline plus a (radius x placement) grid of training runs.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        radii: String,
        #[arg(long, default_value = "real_only,fake_only,dis_only,all")]
        placements: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return 2;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!(
                "error: {}: {}",
                e.kind,
                e.message.replace(['\n', '\r'], " ")
            );
            1
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    use commands as c;
    match command {
        Command::Synth {
            alpha,
            edges,
            n,
            size,
            channels,
            seed,
            out,
        } => c::synth(alpha, edges, n, size, channels, seed, &out),
        Command::Decompose { input, radius, out } => c::decompose(&input, radius, &out),
        Command::Mix {
            low,
            high,
            radius,
            out,
        } => c::mix(&low, &high, radius, &out),
        Command::Spectrum { input, out } => c::spectrum(&input, &out),
        Command::Rps { input, out } => c::rps(&input, &out),
        Command::Bias {
            real,
            fake,
            out,
            plot,
        } => c::bias(&real, &fake, &out, plot.as_deref()),
        Command::Train { config, out } => c::train(&config, &out),
        Command::Probe {
            checkpoint,
            primary,
            donor,
            radii,
            seed,
            out,
        } => c::probe(&checkpoint, &primary, &donor, radii.as_deref(), seed, &out),
        Command::Experiment {
            config,
            radii,
            placements,
            out,
        } => c::experiment(&config, &radii, &placements, &out),
    }
}
