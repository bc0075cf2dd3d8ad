//! Crate-wide error type.
//!
//! Errors fall into three families, which the CLI maps onto distinct exit
//! codes: parse/IO failures (malformed files), data invariant violations
//! (well-formed files carrying impossible values), and internal errors.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A dataset, prediction list, or similar collection was empty.
    #[error("empty dataset")]
    EmptyDataset,

    /// A named field violated its invariant (range, sign, finiteness, ...).
    #[error("invalid {field}: {message}")]
    InvalidField {
        /// The offending field.
        field: &'static str,
        /// What went wrong, including the offending value where helpful.
        message: String,
    },

    /// A row of an input file violated a data invariant.
    #[error("row {row}: {message}")]
    InvalidRow {
        /// 1-based row number in the source file (header is row 1).
        row: usize,
        /// Constraint that failed.
        message: String,
    },

    /// Use-case degenerate: abstaining is worth at least as much as being
    /// correct, so the best classifier is no classifier.
    #[error("abstention dominates: no classifier needed")]
    AbstentionDominates,

    /// Use-case degenerate: a wrong answer beats abstaining, so the
    /// classifier should never abstain and thresholding is pointless.
    #[error("wrong beats abstain: never abstain regime")]
    NeverAbstain,

    /// A file could not be parsed (syntax, not semantics).
    #[error("parse error at line {line}: {message}")]
    Parse {
        /// 1-based line number.
        line: usize,
        /// Parser diagnostic.
        message: String,
    },

    /// Malformed file at an unknown position (e.g. bad JSON document).
    #[error("parse error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn field(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            message: message.into(),
        }
    }
}
