//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by parsing, preprocessing, resampling, and the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: String,
        reason: String,
    },

    #[error("label column not found: {0}")]
    Label(String),

    #[error("class {class} has {count} instances; at least {needed} required")]
    ClassTooSmall {
        class: usize,
        count: usize,
        needed: usize,
    },

    #[error("degenerate data: all rows identical")]
    DegenerateData,

    #[error("requested {requested} features, valid range is 1..={available}")]
    BadFeatureCount { requested: usize, available: usize },

    #[error("k={k} exceeds the {available} available candidates")]
    KTooLarge { k: usize, available: usize },

    #[error("minority class has {count} rows; more than k={k} required")]
    TooFewMinority { count: usize, k: usize },

    #[error("minority class has {count} rows, below the retention floor of {min_keep}")]
    MinorityCollapsed { count: usize, min_keep: usize },

    #[error("class counts are tied at {count}; nothing to balance")]
    TieClassCounts { count: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("scores cover only one class; ranked AUC is undefined")]
    OneClassOnly,

    #[error("expected a binary dataset, found {0} classes")]
    NotBinary(usize),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
