//! Experiment runner for the Frequency Principle laboratory: flat key/value
//! configs, the named experiment pipelines, CSV/JSON output and SVG figures.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod plots;
pub mod svg;

pub use config::{Config, Schema};
pub use experiments::{run_experiment, schema, RunContext, EXPERIMENTS};
pub use manifest::ExperimentManifest;
