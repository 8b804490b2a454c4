//! Ranking EEG electrode set-ups for alpha-rhythm detection.
//!
//! For every candidate montage a one-class dual-decoder autoencoder is
//! trained on windows of the target state only; windows it reconstructs
//! badly are flagged as the other state. Set-ups are ranked by
//! cross-validated F-score and the smallest comfortable one that stays
//! close to the occipital reference is selected.
//!
//! ```text
//! Recording ──derive──▶ bipolar channels ──features──▶ FeatureSeries
//!     ──K rows──▶ ModelWindow ──z-score──▶ UsadModel::score ──threshold──▶ F-score
//! ```

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod synthgen;

pub use config::RunConfig;
pub use dataset::{builtin_setup, builtin_setups, Channel, ElectrodeName, Label, Recording, SetUp};
pub use error::{Error, Result};
pub use features::{FeatureConfig, FeatureSeries, ModelWindow, Normalizer};
pub use synthgen::SynthConfig;
pub use model::{NetSpec, TrainConfig, UsadModel};
pub use eval::{EvalConfig, EvalReport, PipelineConfig, ThresholdRule};
