//! Evaluation environments: definition, CSV ingestion, out-of-sample
//! splitting, and simulators for synthetic environments and bibliometric
//! worlds.

mod biblio;
mod csv_io;
mod environment;
mod simulate;
mod split;

use thiserror::Error;

pub use biblio::{
    load_institutions, load_papers, load_researchers, simulate_bibliometric_world,
    simulate_bibliometric_world_with, AuthoredPaper, BibliometricWorld, DocType, FieldParams,
    InstitutionRecord, PaperRecord, ResearcherRecord, WorldConfig,
};
pub use csv_io::{load_environment, read_environment, save_environment, write_environment};
pub use environment::{CueDefinition, CueKind, Direction, Environment, Label};
pub use simulate::{
    binary_correlation, calibrate_loading, simulate_environment, SimSpec, WeightProfile,
};
pub use split::{split_environment, SplitPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {}column `{column}`: {message}", row.map(|r| format!("row {r}, ")).unwrap_or_default())]
    Schema {
        row: Option<usize>,
        column: String,
        message: String,
    },
    #[error("invalid environment shape: {0}")]
    Shape(String),
    #[error("too few objects to split: {objects} objects give {train} train / {test} test (need >= 2 each)")]
    TooFewObjects {
        objects: usize,
        train: usize,
        test: usize,
    },
    #[error("redundancy {target} unreachable (calibration reached {reached})")]
    UnreachableRedundancy { target: f64, reached: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
