//! Reproducible experiment pipelines behind the command-line front end.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod manifest;

pub use commands::{run, Command, RunOutcome};
pub use config::ExperimentConfig;
pub use manifest::{verify_manifest, Drift, RunManifest};
