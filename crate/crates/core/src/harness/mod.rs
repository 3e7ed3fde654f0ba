//! Experiment orchestration: config files, parallel (policy, λ, seed)
//! sweeps, aggregation and CSV output.

mod config;
mod emit;
mod experiment;

pub use config::{ExperimentConfig, ReadRate, Requesters, SCALE_CACHE_OBJECTS, SCALE_CHUNKS, SCALE_DURATION, SCALE_OBJECTS};
pub use emit::emit_results;
pub use experiment::{cells, run_cell, run_experiment, run_experiment_with, Cell, CellFailure, CellResult, Summary, SweepResult, SweepRow};
