//! Construction of fast-and-frugal trees from training environments: cue
//! statistics, numeric-cue binarization, cue ordering, exit assignment and
//! cost tuning.

mod build;
mod stats;
mod tree;

use thiserror::Error;

pub use build::{build_fft, tune_fft_cost, CostRatio, ExitPolicy};
pub use stats::{binarize_cue, compute_cue_stats, order_cues, Binarization, CueStats, OrderingRule};
pub use tree::{Comparison, Condition, ExitNode, FastFrugalTree, FinalNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FftError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("cue `{0}` is constant")]
    ConstantCue(String),
    #[error("no cue can be binarized on the training data")]
    NoUsableCue,
    #[error("max_depth must be >= 1")]
    InvalidDepth,
    #[error("costs must be finite and positive (cost_fn={cost_fn}, cost_fp={cost_fp})")]
    InvalidCost { cost_fn: f64, cost_fp: f64 },
    #[error("no candidate cost ratios given")]
    NoCandidates,
    #[error("train and validation environments have different cues")]
    CueMismatch,
    #[error("unknown cue `{0}`")]
    UnknownCue(String),
    #[error("cue name `{0}` cannot appear in a tree (no whitespace, `|`, `,` or `#`)")]
    InvalidCueName(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("tree parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
