use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification of an [`enum@Error`], used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The request itself was invalid (bad tolerance, conflicting options).
    Config,
    /// The data violated a precondition (domain, shape, or file contents).
    Data,
    /// The computation failed numerically (singular system, divergence).
    Numerical,
}

/// Errors produced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot sequence: {0}")]
    InvalidKnots(String),

    #[error("point {value} lies outside the spline domain [{lower}, {upper}]")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },

    #[error("basis index {index} is out of range for {count} basis functions")]
    BasisIndex { index: usize, count: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("basis function {index} has no support on the sampling grid")]
    EmptySupport { index: usize },

    #[error("least-squares system is rank-deficient: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("{path}: {message} (row {row}, column {column})")]
    CsvCell {
        path: PathBuf,
        row: u64,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    BadDataset { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed model document: {0}")]
    MalformedDocument(String),

    #[error("unsupported model document version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("model document holds a {found} model, expected {expected}")]
    KindMismatch {
        expected: &'static str,
        found: String,
    },
}

impl Error {
    /// The class this error belongs to.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidConfig(_) => ErrorClass::Config,
            EmptySupport { .. } | Singular(_) | TrainingDiverged { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}
