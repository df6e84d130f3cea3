//! Benchmark harness: datasets, metrics, configuration and the runner.

pub mod config;
pub mod dataset;
pub mod metrics;
pub mod runner;

pub use config::{ExperimentConfig, Level, MechanismKind};
pub use dataset::{gen_synthetic, ingest_csv, Dataset, Provenance, Synthetic};
pub use metrics::{append_metrics, linf_error, mse, read_metrics, to_csv_string, MetricsRow, ProbePolicy};
pub use runner::{run_experiment, run_trial, Cell, Trial};
