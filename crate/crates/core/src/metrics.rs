// SPDX-License-Identifier: MIT OR Apache-2.0

//! Label error counting and ROC analysis.
//!
//! A label is a false positive when the model predicts more changes in its
//! region than labeled (either polarity), a false negative when a positive
//! label receives no change, and a true positive when a positive label
//! receives at least one. A positive label with two or more changes is
//! therefore both a false positive and a true positive.
//!
//! ROC coordinates use `tpr = tp / positive_labels` and
//! `fpr = fp / labels`: every label can be a false positive, so all labels
//! form the FPR denominator.

use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{count_changes, Label, LabelSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStatus {
    Correct,
    FalsePositive,
    FalseNegative,
}

impl LabelStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelStatus::Correct => "correct",
            LabelStatus::FalsePositive => "false_positive",
            LabelStatus::FalseNegative => "false_negative",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelOutcome {
    /// 1-based index in the sorted label set.
    pub label_index: usize,
    pub start: usize,
    pub end: usize,
    pub changes: u8,
    pub predicted_changes: usize,
    pub status: LabelStatus,
    pub is_true_positive: bool,
}

pub fn classify_label(label_index: usize, label: &Label, changepoints: &[usize]) -> LabelOutcome {
    let predicted = count_changes(changepoints, label.start, label.end);
    let expected = label.changes as usize;
    let status = if predicted > expected {
        LabelStatus::FalsePositive
    } else if predicted == 0 && expected == 1 {
        LabelStatus::FalseNegative
    } else {
        LabelStatus::Correct
    };
    LabelOutcome {
        label_index,
        start: label.start,
        end: label.end,
        changes: label.changes,
        predicted_changes: predicted,
        status,
        is_true_positive: expected == 1 && predicted >= 1,
    }
}

pub fn label_outcomes(labels: &LabelSet, changepoints: &[usize]) -> Vec<LabelOutcome> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| classify_label(i + 1, l, changepoints))
        .collect()
}

/// Aggregated label outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tp: usize,
    pub labels: usize,
    pub positive_labels: usize,
}

impl ErrorCounts {
    pub fn errors(&self) -> usize {
        self.fp + self.fn_
    }

    pub fn tpr(&self) -> Option<f64> {
        (self.positive_labels > 0).then(|| self.tp as f64 / self.positive_labels as f64)
    }

    pub fn fpr(&self) -> Option<f64> {
        (self.labels > 0).then(|| self.fp as f64 / self.labels as f64)
    }
}

impl Add for ErrorCounts {
    type Output = ErrorCounts;

    fn add(self, rhs: Self) -> Self {
        ErrorCounts {
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
            tp: self.tp + rhs.tp,
            labels: self.labels + rhs.labels,
            positive_labels: self.positive_labels + rhs.positive_labels,
        }
    }
}

impl AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sum for ErrorCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ErrorCounts::default(), Add::add)
    }
}

impl<'a> Sum<&'a LabelOutcome> for ErrorCounts {
    fn sum<I: Iterator<Item = &'a LabelOutcome>>(iter: I) -> Self {
        let mut c = ErrorCounts::default();
        for o in iter {
            c.labels += 1;
            c.positive_labels += (o.changes == 1) as usize;
            c.fp += (o.status == LabelStatus::FalsePositive) as usize;
            c.fn_ += (o.status == LabelStatus::FalseNegative) as usize;
            c.tp += o.is_true_positive as usize;
        }
        c
    }
}

pub fn total_errors(labels: &LabelSet, changepoints: &[usize]) -> ErrorCounts {
    label_outcomes(labels, changepoints).iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub penalty: f64,
    /// Absent when there are no positive labels.
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: Option<f64>,
}

/// ROC points for a penalty path, sorted by `(fpr, tpr)`, and the
/// trapezoid AUC after anchoring the curve at `(0, 0)` and `(1, 1)`.
pub fn roc_curve(per_penalty: &[(f64, ErrorCounts)]) -> Result<RocCurve> {
    if per_penalty.is_empty() {
        return Err(Error::InvalidArgument("ROC curve needs at least one point".into()));
    }
    let mut points: Vec<RocPoint> = per_penalty
        .iter()
        .map(|(penalty, c)| RocPoint {
            penalty: *penalty,
            tpr: c.tpr(),
            fpr: c.fpr(),
        })
        .collect();
    let defined = points.iter().all(|p| p.tpr.is_some() && p.fpr.is_some());
    if !defined {
        return Ok(RocCurve { points, auc: None });
    }
    points.sort_by(|a, b| {
        a.fpr
            .partial_cmp(&b.fpr)
            .unwrap()
            .then(a.tpr.partial_cmp(&b.tpr).unwrap())
    });
    let mut xy = vec![(0.0, 0.0)];
    xy.extend(points.iter().map(|p| (p.fpr.unwrap(), p.tpr.unwrap())));
    xy.push((1.0, 1.0));
    let auc = xy
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(RocCurve {
        points,
        auc: Some(auc),
    })
}
