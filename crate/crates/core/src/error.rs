use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),

    #[error("negative value {value} at sample `{sample}`, feature `{feature}`")]
    NegativeValue {
        sample: String,
        feature: String,
        value: f64,
    },

    #[error("non-finite value at sample `{sample}`, feature `{feature}`")]
    NonFinite { sample: String, feature: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("sample sets differ: {0}")]
    UnmatchedSamples(String),

    #[error("binary outcome needs exactly 2 distinct values, found {0}")]
    Cardinality(usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("scenario k=0 (observed data) is missing")]
    MissingObservedScenario,

    #[error("full-mixing scenario k={0} is missing")]
    MissingFullMixScenario(usize),

    #[error("need at least {needed} curve points, have {have}")]
    TooFewPoints { needed: usize, have: usize },

    #[error("scenarios must cover k = 0..={0} at stride 1")]
    Stride(usize),

    #[error("matrix is not positive definite (pivot {0})")]
    Cholesky(usize),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("checkpoint does not match this run: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error comes from bad user input rather than a failure
    /// during computation. The CLI maps these to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DuplicateId(_)
                | Error::NegativeValue { .. }
                | Error::NonFinite { .. }
                | Error::MissingColumn(_)
                | Error::UnmatchedSamples(_)
                | Error::Cardinality(_)
                | Error::Invalid(_)
                | Error::UnknownFeature(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
