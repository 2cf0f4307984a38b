//! Experiment harness for the affine-group walk laboratory: configuration,
//! deterministic report writers, one runner per experiment, the contrast
//! report, and the acceptance gate shared by the CLI and the integration
//! test suite.

pub mod acceptance;
pub mod config;
pub mod contrast;
pub mod experiments;
pub mod output;

pub use config::LabConfig;
pub use experiments::{run_experiment, EXPERIMENTS};
