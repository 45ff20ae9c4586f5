// SPDX-License-Identifier: MIT OR Apache-2.0

//! Optimal changepoint detection for partially labeled sequences.
//!
//! The centerpiece is [`lopart`]: an exact dynamic program for the
//! penalized square-loss changepoint problem subject to region labels, each
//! demanding exactly zero or exactly one change. Around it sit the
//! unconstrained baseline [`opart`], label error metrics and ROC curves,
//! penalty learning, a cross-validation harness, a timing benchmark, file
//! formats, a command-line front end and an HTTP service for interactive
//! labeling.
//!
//! ```
//! use lopart::{lopart, opart, DataSequence, LabelSet};
//!
//! let seq = DataSequence::new(vec![0.0, 0.0, 10.0]).unwrap();
//! let labels = LabelSet::validate([(1i64, 3i64, 1i64)], 3).unwrap();
//! let fit = lopart(&seq, &labels, 1.0).unwrap();
//! assert_eq!(fit.changepoints, vec![2]);
//! assert_eq!(opart(&seq, 1.0).unwrap().changepoints, vec![2]);
//! ```

#![forbid(unsafe_code)]

pub mod cli;
pub mod cv;
pub mod data;
pub mod error;
pub mod io;
pub mod labels;
pub mod metrics;
pub mod oracle;
pub mod penalty;
pub mod service;
pub mod simbench;
pub mod solver;

pub use data::{DataSequence, SegmentFit};
pub use error::{Error, Result};
pub use labels::{count_changes, Label, LabelSet, RawLabel};
pub use metrics::{total_errors, ErrorCounts, LabelOutcome, LabelStatus};
pub use solver::{lopart, lopart_infinite, opart, solve, Algorithm, Penalty, Segment, Segmentation};
