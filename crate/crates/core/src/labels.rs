// SPDX-License-Identifier: MIT OR Apache-2.0

//! Region labels and the ordering/consistency rules they obey.
//!
//! A change "at position `i`" sits between data points `i` and `i + 1`.
//! A label `(start, end, changes)` governs change positions
//! `start..=end - 1`, so two labels may share a boundary point: a change at
//! the shared point belongs to the later label only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labeled region: exactly `changes` (0 or 1) changepoints in `start..end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub start: usize,
    pub end: usize,
    pub changes: u8,
}

impl Label {
    pub const fn new(start: usize, end: usize, changes: u8) -> Self {
        Self {
            start,
            end,
            changes,
        }
    }

    pub const fn is_positive(&self) -> bool {
        self.changes == 1
    }

    /// Change positions governed by this label.
    pub fn change_positions(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

/// A label as read from a file or request, before validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLabel {
    pub start: i64,
    pub end: i64,
    pub changes: i64,
}

impl From<(i64, i64, i64)> for RawLabel {
    fn from((start, end, changes): (i64, i64, i64)) -> Self {
        Self {
            start,
            end,
            changes,
        }
    }
}

impl From<Label> for RawLabel {
    fn from(l: Label) -> Self {
        Self {
            start: l.start as i64,
            end: l.end as i64,
            changes: l.changes as i64,
        }
    }
}

/// How the admissible last-changepoint set evolves when stepping to `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateRule {
    /// Inside a label (or at the end of a negative one): no new candidate.
    Keep,
    /// End of a positive label: candidates become `from..t`.
    Reset { from: usize },
    /// Unlabeled, or at the start of a label: add `t - 1`.
    Append,
}

/// Ordered, validated labels for a sequence of `n` data points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LabelSet {
    labels: Vec<Label>,
    negative_region: Vec<usize>,
    n: usize,
}

impl LabelSet {
    /// Sort, check and index raw labels for a sequence of `n` points.
    ///
    /// Error indices are 1-based positions in the input list.
    pub fn validate<I, R>(raw: I, n: usize) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: Into<RawLabel>,
    {
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let mut indexed = Vec::new();
        for (i, r) in raw.into_iter().enumerate() {
            let r: RawLabel = r.into();
            let index = i + 1;
            if r.changes != 0 && r.changes != 1 {
                return Err(Error::label(
                    index,
                    format!("changes must be 0 or 1, got {}", r.changes),
                ));
            }
            if r.start >= r.end {
                return Err(Error::label(
                    index,
                    format!("start {} must be less than end {}", r.start, r.end),
                ));
            }
            if r.start < 1 || r.end as u64 > n as u64 {
                return Err(Error::label(
                    index,
                    format!("region [{}, {}] is outside 1..={n}", r.start, r.end),
                ));
            }
            indexed.push((index, Label::new(r.start as usize, r.end as usize, r.changes as u8)));
        }
        indexed.sort_by_key(|(_, l)| l.start);
        for pair in indexed.windows(2) {
            let (_, prev) = pair[0];
            let (index, next) = pair[1];
            if prev.end > next.start {
                return Err(Error::label(
                    index,
                    format!(
                        "region [{}, {}] overlaps [{}, {}]",
                        next.start, next.end, prev.start, prev.end
                    ),
                ));
            }
        }
        let labels: Vec<Label> = indexed.into_iter().map(|(_, l)| l).collect();
        Ok(Self::from_sorted(labels, n))
    }

    /// No labels.
    pub fn empty(n: usize) -> Self {
        Self {
            labels: Vec::new(),
            negative_region: Vec::new(),
            n,
        }
    }

    fn from_sorted(labels: Vec<Label>, n: usize) -> Self {
        let negative_region = labels
            .iter()
            .filter(|l| !l.is_positive())
            .flat_map(|l| l.change_positions())
            .collect();
        Self {
            labels,
            negative_region,
            n,
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sequence length the labels were validated against.
    pub fn sequence_len(&self) -> usize {
        self.n
    }

    /// Sorted change positions covered by negative labels.
    pub fn negative_region(&self) -> &[usize] {
        &self.negative_region
    }

    pub fn in_negative_region(&self, position: usize) -> bool {
        self.negative_region.binary_search(&position).is_ok()
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.labels.iter()
    }

    /// Keep only the labels whose index satisfies `keep`. Order is preserved.
    pub fn subset(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let labels = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, l)| *l)
            .collect();
        Self::from_sorted(labels, self.n)
    }

    /// Positive labels kept, every other change position covered by negative labels.
    ///
    /// Solving with this set at zero penalty yields the infinite-penalty model.
    pub fn positive_complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = 1;
        for l in self.labels.iter().filter(|l| l.is_positive()) {
            if cursor < l.start {
                out.push(Label::new(cursor, l.start, 0));
            }
            out.push(*l);
            cursor = l.end;
        }
        if cursor < self.n {
            out.push(Label::new(cursor, self.n, 0));
        }
        Self::from_sorted(out, self.n)
    }

    /// Index (1-based, 0 when none) of the last label starting before `t`.
    pub fn last_label_index(&self, t: usize) -> usize {
        self.labels.partition_point(|l| l.start < t)
    }

    /// Which update applies to the candidate set at step `t`.
    pub fn candidate_rule(&self, t: usize) -> CandidateRule {
        let j = self.last_label_index(t);
        rule_for(j.checked_sub(1).map(|i| &self.labels[i]), t)
    }
}

/// Candidate rule given the last label starting before `t`.
#[inline]
pub(crate) fn rule_for(label: Option<&Label>, t: usize) -> CandidateRule {
    match label {
        Some(l) if t <= l.end => {
            if l.is_positive() && t == l.end {
                CandidateRule::Reset { from: l.start }
            } else {
                CandidateRule::Keep
            }
        }
        _ => CandidateRule::Append,
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = &'a Label;
    type IntoIter = std::slice::Iter<'a, Label>;

    fn into_iter(self) -> Self::IntoIter {
        self.labels.iter()
    }
}

/// Number of changepoints in positions `start..end` (`changepoints` sorted).
pub fn count_changes(changepoints: &[usize], start: usize, end: usize) -> usize {
    if end <= start {
        return 0;
    }
    let lo = changepoints.partition_point(|&c| c < start);
    let hi = changepoints.partition_point(|&c| c < end);
    hi - lo
}
