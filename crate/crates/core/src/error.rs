// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solvers, learners and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("data sequence must contain at least one value")]
    EmptySequence,

    #[error("value at position {position} is not finite")]
    NonFiniteValue { position: usize },

    #[error("label {index}: {reason}")]
    InvalidLabel { index: usize, reason: String },

    #[error("segment [{start}, {end}] is not inside 1..={n}")]
    SegmentRange { start: usize, end: usize, n: usize },

    #[error("penalty must be finite and non-negative, got {0}")]
    InvalidPenalty(f64),

    #[error("exhaustive search supports at most {max} data points, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn label(index: usize, reason: impl Into<String>) -> Self {
        Error::InvalidLabel {
            index,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied input rather than I/O or internal faults.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
