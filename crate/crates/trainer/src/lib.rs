//! Desk-scale GAN training with the discriminator looking at frequency-filtered
//! ("HFF") or band-swapped ("HFC") images.
//!
//! The filter can sit at three places: reals entering D in the D update (i),
//! fakes entering D in the D update (ii), and fakes entering D in the G
//! update (iii). A [`Placement`] selects which of these are active.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod models;
pub mod seed;
pub mod trainer;

pub use crate::config::{DatasetSpec, Placement, Sites, TrainConfig};
pub use crate::dataset::{load_corpus, make_dataset, make_synthetic_dataset};
pub use crate::error::{Result, TrainError};
pub use crate::experiment::{placement_experiment, ExperimentReport, ExperimentRow};
pub use crate::models::{discriminator_specs, generator_specs};
pub use crate::trainer::{
    low_horizon, run, train, train_observed, DStepStats, MetricsRow, NoObserver, RunArtifacts,
    RunSummary, StepStats, TrainObserver, Trainer, METRICS_EVERY, METRICS_HEADER,
};
