//! Monte Carlo harness: configuration, deterministic per-trial random
//! streams, the experiment engine, result writers and the CLI.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod output;
pub mod rng;
pub mod selfcheck;

pub use config::ExperimentConfig;
pub use experiment::{run_ce_mse, run_experiment, run_fer, ExperimentOutput, ResultRow};
