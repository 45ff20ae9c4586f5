// SPDX-License-Identifier: MIT OR Apache-2.0

//! Observed sequences and constant-time square-loss segment costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A univariate data sequence `x_1..x_N` with prefix sums of `x` and `x²`.
///
/// Positions are 1-based throughout the public API: `segment_loss(1, n)`
/// covers the whole sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DataSequence {
    values: Vec<f64>,
    cum_sum: Vec<f64>,
    cum_sq: Vec<f64>,
}

/// Optimal constant fit of one segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentFit {
    pub mean: f64,
    pub loss: f64,
}

impl DataSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { position: i + 1 });
        }
        let mut cum_sum = Vec::with_capacity(values.len() + 1);
        let mut cum_sq = Vec::with_capacity(values.len() + 1);
        let (mut s, mut sq) = (0.0, 0.0);
        cum_sum.push(s);
        cum_sq.push(sq);
        for &x in &values {
            s += x;
            sq += x * x;
            cum_sum.push(s);
            cum_sq.push(sq);
        }
        Ok(Self {
            values,
            cum_sum,
            cum_sq,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a sequence holds at least one value.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cum_sum(&self) -> &[f64] {
        &self.cum_sum
    }

    pub fn cum_sq(&self) -> &[f64] {
        &self.cum_sq
    }

    /// Minimal square loss and optimal mean of the segment `x_start..=x_end`.
    pub fn segment_fit(&self, start: usize, end: usize) -> Result<SegmentFit> {
        if start == 0 || start > end || end > self.len() {
            return Err(Error::SegmentRange {
                start,
                end,
                n: self.len(),
            });
        }
        Ok(self.fit_unchecked(start, end))
    }

    /// `min_μ Σ_{i=start..end} (μ − x_i)²`.
    pub fn segment_loss(&self, start: usize, end: usize) -> Result<f64> {
        self.segment_fit(start, end).map(|f| f.loss)
    }

    /// Square loss for `1 ≤ start ≤ end ≤ N`, without bounds checks beyond slice indexing.
    #[inline]
    pub(crate) fn loss_unchecked(&self, start: usize, end: usize) -> f64 {
        if start == end {
            return 0.0;
        }
        let count = (end - start + 1) as f64;
        let sum = self.cum_sum[end] - self.cum_sum[start - 1];
        let sq = self.cum_sq[end] - self.cum_sq[start - 1];
        // Cancellation can leave a tiny negative residue for near-constant segments.
        (sq - sum * sum / count).max(0.0)
    }

    #[inline]
    pub(crate) fn mean_unchecked(&self, start: usize, end: usize) -> f64 {
        let count = (end - start + 1) as f64;
        (self.cum_sum[end] - self.cum_sum[start - 1]) / count
    }

    #[inline]
    pub(crate) fn fit_unchecked(&self, start: usize, end: usize) -> SegmentFit {
        SegmentFit {
            mean: self.mean_unchecked(start, end),
            loss: self.loss_unchecked(start, end),
        }
    }
}

impl TryFrom<Vec<f64>> for DataSequence {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<DataSequence> for Vec<f64> {
    fn from(seq: DataSequence) -> Self {
        seq.values
    }
}
