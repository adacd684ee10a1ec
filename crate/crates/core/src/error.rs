use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = EdaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EdaError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate population: only {finite} finite objective values, need {needed}")]
    DegeneratePopulation { finite: usize, needed: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Usage(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("function `{name}` is not offered in {dim}D (supported: {supported:?})")]
    UnsupportedDimension {
        name: String,
        dim: usize,
        supported: Vec<usize>,
    },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<EdaError>,
    },

    #[error("{failed} of {total} runs failed for {label}; aborting")]
    TooManyFailures {
        label: String,
        failed: usize,
        total: usize,
    },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error at {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl EdaError {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        EdaError::NumericDegeneracy(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        EdaError::InvalidConfig(msg.into())
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        EdaError::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// Process exit code for the error's category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "numeric" => 3,
            _ => 4,
        }
    }

    /// Short category name used for CLI diagnostics and exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            EdaError::DimensionMismatch { .. }
            | EdaError::InvalidConfig(_)
            | EdaError::Usage(_)
            | EdaError::UnknownFunction(_)
            | EdaError::UnsupportedDimension { .. } => "usage",
            EdaError::NumericDegeneracy(_)
            | EdaError::InsufficientData { .. }
            | EdaError::DegeneratePopulation { .. }
            | EdaError::TooManyFailures { .. } => "numeric",
            EdaError::AtIteration { source, .. } => source.category(),
            EdaError::Io { .. } | EdaError::Csv { .. } | EdaError::Json { .. } => "io",
        }
    }
}
