//! Experiment runner, file formats and tournament ratings on top of
//! `fxp-core`.

pub mod config;
pub mod elo;
pub mod experiment;
pub mod formats;

pub use config::ExperimentConfig;
pub use elo::{fit_elo, EloTable};
pub use experiment::{exploit, run_experiment, tournament};
