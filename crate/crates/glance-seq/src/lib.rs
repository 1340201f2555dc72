//! Dataset ingestion, evaluation harness, and file formats for
//! glance-sequence classification.
//!
//! This crate wraps [`glance_seq_core`] with everything that touches the
//! filesystem: the two-file CSV ingest schema with its label vocabulary,
//! binary-problem enumeration and stratified splits, the repeated-split
//! evaluation harness with transition-matrix exports, synthetic dataset
//! generation with a Bayes-accuracy oracle, and the text formats for models
//! and dataset bundles. The `glance-seq` binary exposes all of it as
//! subcommands.

pub mod bundle;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod experiment;
pub mod io_util;
pub mod matrix_io;
pub mod model_io;
pub mod schema;
pub mod stream_io;
pub mod synth;

pub use dataset::{enumerate_problems, ingest, split, BinaryProblem, Dataset, IngestReport};
pub use experiment::{
    bayes_accuracy_estimate, generate_synthetic, run_all, run_problem, ExperimentConfig,
    MetricKind, ProblemResult, SyntheticSpec,
};
pub use schema::bin_age;
