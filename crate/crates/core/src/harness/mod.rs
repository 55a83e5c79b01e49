//! Ecological benchmarking: fitting vs prediction on paired splits,
//! confusion-matrix accounting, frugality and less-is-more probes.

mod bench;
mod metrics;
mod strategy;

use thiserror::Error;

pub use bench::{
    cross_validate, emit_report, less_is_more_probe, parse_json_report, partition_hash, render_report, round_sig,
    BenchmarkReport, CrossValidateOptions, EnvSource, Estimate, FailedCell, Finding, ProbeVerdict, ReportFormat,
    RunMetadata, SourceInfo, StrategyReport, CSV_HEADER,
};
pub use metrics::{confusion_of, ConfusionMatrix};
pub use strategy::{evaluate_classifier, Evaluation, StrategyKind, StrategySpec, Task};

use crate::envmodel::EnvError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("strategy `{strategy}` failed: {message}")]
    Strategy { strategy: String, message: String },
    #[error("strategy `{strategy}` does not apply to {task}")]
    Inapplicable { strategy: String, task: Task },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("train and test environments have different cues")]
    CueMismatch,
    #[error("{predictions} predictions for {truth} truth labels")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Io(String),
    #[error("JSON error: {0}")]
    Json(String),
}
