//! Benchmark problems and the experiment harness around `minimax-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod check;
pub mod config;
pub mod du;
pub mod error;
pub mod experiment;
pub mod quadratic;
pub mod trajectory;

pub use config::ExperimentConfig;
pub use error::{BenchError, Result};
pub use experiment::{run_experiment, ExperimentReport, RunOverrides, RunSummary};
