//! Experiment harness around `anyonlab-core`: configuration, drivers,
//! result files and reports.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod fieldio;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{run_experiment, RunOutput};
pub use report::{ResultRecord, Summary};
