//! Experiment harness: configuration, replicated runs, statistics and
//! reports for the strategies in `throttle-core`.

pub mod config;
pub mod report;
pub mod runner;
pub mod stats;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig, InstanceSpec};
pub use runner::{run_experiment, Report, RunOptions};
