//! Experiment harness for the distorted greedy maximizers: dataset loaders,
//! experiment configuration, seeded row runners and CSV output.

pub mod config;
pub mod data;
pub mod error;
pub mod run;

pub use config::{AlgoSpec, Algorithm, Experiment, ExperimentConfig};
pub use data::{load_edge_list, load_feature_matrix, Features, LoadedGraph};
pub use error::{BenchError, Result};
pub use run::{run_experiment, run_hardness, run_verify, sweep_trace, ResultRow, SweepTraceRow, RESULT_HEADER};
