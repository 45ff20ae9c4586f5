// SPDX-License-Identifier: MIT OR Apache-2.0

//! Optimal partitioning solvers.
//!
//! [`opart`] minimizes square loss plus `λ` per changepoint with no
//! constraints. [`lopart`] solves the same objective subject to every label
//! receiving exactly its labeled number of changes, by restricting the last
//! changepoint of each sub-problem to an admissible candidate set that is
//! rebuilt incrementally from the labels. [`lopart_infinite`] is the
//! `λ → ∞` limit: one change per positive label and none anywhere else.
//!
//! All solvers break argmin ties toward the smallest last changepoint.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::labels::{rule_for, CandidateRule, LabelSet};

/// Per-changepoint penalty; `Infinite` selects the label-only limit model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Penalty {
    Finite(f64),
    Infinite,
}

impl Penalty {
    pub fn finite(value: f64) -> Result<Self> {
        check_penalty(value)?;
        Ok(Penalty::Finite(value))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Penalty::Infinite)
    }

    /// `f64::INFINITY` for the infinite penalty.
    pub fn value(&self) -> f64 {
        match *self {
            Penalty::Finite(v) => v,
            Penalty::Infinite => f64::INFINITY,
        }
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Penalty::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("penalty must be a number or \"inf\", got {s:?}")))?;
        if v == f64::INFINITY {
            return Ok(Penalty::Infinite);
        }
        Penalty::finite(v)
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Finite(v) => write!(f, "{v}"),
            Penalty::Infinite => f.write_str("inf"),
        }
    }
}

fn check_penalty(value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidPenalty(value))
    }
}

/// Which solver to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Opart,
    Lopart,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Opart => "opart",
            Algorithm::Lopart => "lopart",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "opart" => Ok(Algorithm::Opart),
            "lopart" => Ok(Algorithm::Lopart),
            other => Err(Error::InvalidArgument(format!(
                "algorithm must be opart or lopart, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A constant segment `start..=end` (1-based, inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub mean: f64,
}

/// A fitted piecewise-constant model.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    /// Sorted positions `t`; each marks a change between `x_t` and `x_{t+1}`.
    pub changepoints: Vec<usize>,
    /// One mean per segment.
    pub means: Vec<f64>,
    /// Penalized objective. For the infinite penalty this is the square loss alone.
    pub cost: f64,
    pub penalty: Penalty,
    n: usize,
}

impl Segmentation {
    pub(crate) fn from_changepoints(
        seq: &DataSequence,
        changepoints: Vec<usize>,
        cost: f64,
        penalty: Penalty,
    ) -> Self {
        let means = segment_bounds(&changepoints, seq.len())
            .map(|(s, e)| seq.mean_unchecked(s, e))
            .collect();
        Self {
            changepoints,
            means,
            cost,
            penalty,
            n: seq.len(),
        }
    }

    pub fn sequence_len(&self) -> usize {
        self.n
    }

    pub fn segments(&self) -> Vec<Segment> {
        segment_bounds(&self.changepoints, self.n)
            .zip(&self.means)
            .map(|((start, end), &mean)| Segment { start, end, mean })
            .collect()
    }

    /// Square loss of the fitted means, recomputed from the data.
    pub fn loss(&self, seq: &DataSequence) -> f64 {
        segment_bounds(&self.changepoints, self.n)
            .map(|(s, e)| seq.loss_unchecked(s, e))
            .sum()
    }

    /// The penalized objective recomputed from segments; for `λ = ∞` the loss alone.
    pub fn recomputed_cost(&self, seq: &DataSequence) -> f64 {
        match self.penalty {
            Penalty::Finite(lambda) => self.loss(seq) + lambda * self.changepoints.len() as f64,
            Penalty::Infinite => self.loss(seq),
        }
    }
}

fn segment_bounds(changepoints: &[usize], n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let starts = std::iter::once(1).chain(changepoints.iter().map(|&c| c + 1));
    let ends = changepoints.iter().copied().chain(std::iter::once(n));
    starts.zip(ends)
}

/// Dynamic-programming tables from a LOPART run.
#[derive(Clone, Debug, PartialEq)]
pub struct DpState {
    /// `cost[t]` is the optimal constrained cost of `x_1..x_t`; `cost[0] = -λ`.
    /// Positions inside negative labels are never candidates and stay at `+∞`.
    pub cost: Vec<f64>,
    /// Optimal last changepoint for each `t` (0 means a single segment).
    pub last_change: Vec<usize>,
    /// Mean of the last segment of the optimal model up to `t`.
    pub mean_at: Vec<f64>,
    /// Final candidate set `T_N`.
    pub candidates: Vec<usize>,
}

impl DpState {
    /// Changepoints decoded by following `last_change` back from `N`.
    pub fn changepoints(&self) -> Vec<usize> {
        decode(&self.last_change)
    }
}

fn decode(last_change: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = last_change.len() - 1;
    while t > 0 {
        let tau = last_change[t];
        if tau > 0 {
            out.push(tau);
        }
        t = tau;
    }
    out.reverse();
    out
}

/// Apply one step of the candidate recursion: `T_{t-1}` → `T_t`.
pub fn candidate_set_update(prev: &[usize], t: usize, labels: &LabelSet) -> Vec<usize> {
    let mut next = prev.to_vec();
    apply_rule(&mut next, labels.candidate_rule(t), t);
    next
}

#[inline]
fn apply_rule(candidates: &mut Vec<usize>, rule: CandidateRule, t: usize) {
    match rule {
        CandidateRule::Keep => {}
        CandidateRule::Reset { from } => {
            candidates.clear();
            candidates.extend(from..t);
        }
        CandidateRule::Append => candidates.push(t - 1),
    }
}

/// Unconstrained optimal partitioning.
pub fn opart(seq: &DataSequence, penalty: f64) -> Result<Segmentation> {
    check_penalty(penalty)?;
    let n = seq.len();
    let mut cost = vec![0.0; n + 1];
    let mut last_change = vec![0usize; n + 1];
    cost[0] = -penalty;
    for t in 1..=n {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for (tau, &prev) in cost[..t].iter().enumerate() {
            let c = prev + penalty + seq.loss_unchecked(tau + 1, t);
            if c < best {
                best = c;
                arg = tau;
            }
        }
        cost[t] = best;
        last_change[t] = arg;
    }
    Ok(Segmentation::from_changepoints(
        seq,
        decode(&last_change),
        cost[n],
        Penalty::Finite(penalty),
    ))
}

/// Label-constrained optimal partitioning.
pub fn lopart(seq: &DataSequence, labels: &LabelSet, penalty: f64) -> Result<Segmentation> {
    let state = lopart_traced(seq, labels, penalty)?;
    let n = seq.len();
    Ok(Segmentation::from_changepoints(
        seq,
        state.changepoints(),
        state.cost[n],
        Penalty::Finite(penalty),
    ))
}

/// [`lopart`], returning the full dynamic-programming tables.
pub fn lopart_traced(seq: &DataSequence, labels: &LabelSet, penalty: f64) -> Result<DpState> {
    check_penalty(penalty)?;
    let n = seq.len();
    if labels.sequence_len() != n {
        return Err(Error::InvalidArgument(format!(
            "labels were validated for {} data points but the sequence has {n}",
            labels.sequence_len()
        )));
    }
    let mut negative = vec![false; n + 1];
    for &i in labels.negative_region() {
        negative[i] = true;
    }

    let mut cost = vec![f64::INFINITY; n + 1];
    let mut last_change = vec![0usize; n + 1];
    let mut mean_at = vec![f64::NAN; n + 1];
    let mut candidates: Vec<usize> = Vec::new();
    cost[0] = -penalty;

    let all = labels.labels();
    let mut started = 0;
    for t in 1..=n {
        while started < all.len() && all[started].start < t {
            started += 1;
        }
        let rule = rule_for(started.checked_sub(1).map(|j| &all[j]), t);
        apply_rule(&mut candidates, rule, t);
        if negative[t] {
            continue;
        }
        assert!(!candidates.is_empty(), "no admissible last changepoint at t={t}");
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for &tau in &candidates {
            let c = cost[tau] + penalty + seq.loss_unchecked(tau + 1, t);
            if c < best {
                best = c;
                arg = tau;
            }
        }
        cost[t] = best;
        last_change[t] = arg;
        mean_at[t] = seq.mean_unchecked(arg + 1, t);
    }
    Ok(DpState {
        cost,
        last_change,
        mean_at,
        candidates,
    })
}

/// The infinite-penalty model: exactly one change in each positive label, none elsewhere.
///
/// The returned `cost` is the square loss of the fit; the penalized objective is infinite.
pub fn lopart_infinite(seq: &DataSequence, labels: &LabelSet) -> Result<Segmentation> {
    let complement = labels.positive_complement();
    let state = lopart_traced(seq, &complement, 0.0)?;
    let n = seq.len();
    Ok(Segmentation::from_changepoints(
        seq,
        state.changepoints(),
        state.cost[n],
        Penalty::Infinite,
    ))
}

/// Dispatch on algorithm and penalty. OPART ignores `labels`.
pub fn solve(
    seq: &DataSequence,
    labels: &LabelSet,
    penalty: Penalty,
    algorithm: Algorithm,
) -> Result<Segmentation> {
    match (algorithm, penalty) {
        (Algorithm::Opart, Penalty::Finite(lambda)) => opart(seq, lambda),
        (Algorithm::Opart, Penalty::Infinite) => {
            let loss = seq.loss_unchecked(1, seq.len());
            Ok(Segmentation::from_changepoints(seq, Vec::new(), loss, Penalty::Infinite))
        }
        (Algorithm::Lopart, Penalty::Finite(lambda)) => lopart(seq, labels, lambda),
        (Algorithm::Lopart, Penalty::Infinite) => lopart_infinite(seq, labels),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::count_changes;

    fn seq(xs: &[f64]) -> DataSequence {
        DataSequence::new(xs.to_vec()).unwrap()
    }

    fn labels(raw: &[(i64, i64, i64)], n: usize) -> LabelSet {
        LabelSet::validate(raw.iter().copied(), n).unwrap()
    }

    #[test]
    fn opart_two_level_step() {
        let fit = opart(&seq(&[1.0, 1.0, 5.0, 5.0]), 1.0).unwrap();
        assert_eq!(fit.changepoints, vec![2]);
        assert_eq!(fit.means, vec![1.0, 5.0]);
        assert_eq!(fit.cost, 1.0);
    }

    #[test]
    fn opart_constant_data_has_no_changes() {
        let fit = opart(&seq(&[3.0; 7]), 0.5).unwrap();
        assert!(fit.changepoints.is_empty());
        assert_eq!(fit.cost, 0.0);
    }

    #[test]
    fn opart_zero_penalty_fits_exactly() {
        let fit = opart(&seq(&[1.0, 9.0, 1.0]), 0.0).unwrap();
        assert_eq!(fit.cost, 0.0);
        assert_eq!(fit.loss(&seq(&[1.0, 9.0, 1.0])), 0.0);
    }

    #[test]
    fn lopart_forced_change() {
        let x = seq(&[0.0, 0.0, 10.0]);
        let ls = labels(&[(1, 3, 1)], 3);
        let fit = lopart(&x, &ls, 1.0).unwrap();
        assert_eq!(fit.changepoints, vec![2]);
        assert_eq!(fit.cost, 1.0);
        let big = lopart(&x, &ls, 1000.0).unwrap();
        assert_eq!(big.changepoints, vec![2]);
        assert_eq!(big.cost, 1000.0);
    }

    #[test]
    fn lopart_without_labels_matches_opart() {
        let x = seq(&[0.3, 1.2, -0.7, 4.0, 4.4, 3.9, -1.0, 0.0]);
        for lambda in [0.0, 0.5, 2.0, 30.0] {
            let a = opart(&x, lambda).unwrap();
            let b = lopart(&x, &LabelSet::empty(8), lambda).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn candidate_set_without_labels_grows() {
        let ls = LabelSet::empty(10);
        assert_eq!(candidate_set_update(&[0, 1, 2, 3], 5, &ls), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn candidate_set_resets_at_positive_label_end() {
        let ls = labels(&[(1, 3, 1)], 3);
        let mut t_set = Vec::new();
        for t in 1..=3 {
            t_set = candidate_set_update(&t_set, t, &ls);
        }
        assert_eq!(t_set, vec![1, 2]);
    }

    #[test]
    fn candidate_set_matches_worked_example() {
        let ls = labels(&[(45, 55, 1), (80, 90, 0)], 100);
        let mut t_set = Vec::new();
        for t in 1..=100 {
            t_set = candidate_set_update(&t_set, t, &ls);
        }
        let expected: Vec<usize> = (45..=79).chain(90..=99).collect();
        assert_eq!(t_set, expected);
        let x = DataSequence::new((0..100).map(|i| (i % 7) as f64).collect()).unwrap();
        assert_eq!(lopart_traced(&x, &ls, 10.0).unwrap().candidates, expected);
    }

    #[test]
    fn infinite_penalty_single_positive_label() {
        let xs: Vec<f64> = (1..=100).map(|i| if i <= 50 { 0.0 } else { 1.0 } + (i % 3) as f64 * 0.1).collect();
        let x = seq(&xs);
        let ls = labels(&[(45, 55, 1)], 100);
        let fit = lopart_infinite(&x, &ls).unwrap();
        assert_eq!(fit.changepoints.len(), 1);
        assert!((45..55).contains(&fit.changepoints[0]));
        assert_eq!(fit.changepoints, vec![50]);
        assert!(fit.penalty.is_infinite());
        assert!((fit.cost - fit.loss(&x)).abs() < 1e-9);
    }

    #[test]
    fn infinite_penalty_without_labels_is_one_segment() {
        let x = seq(&[1.0, 5.0, 2.0]);
        let fit = lopart_infinite(&x, &LabelSet::empty(3)).unwrap();
        assert!(fit.changepoints.is_empty());
        assert_eq!(fit.means, vec![8.0 / 3.0]);
    }

    #[test]
    fn infinite_penalty_enumerates_two_by_two_grid() {
        let xs = [0.1, 0.0, 2.2, 1.9, 2.1, 4.0, 4.3, 3.8, 4.1, 4.0];
        let x = seq(&xs);
        let ls = labels(&[(2, 4, 1), (6, 8, 1)], 10);
        let fit = lopart_infinite(&x, &ls).unwrap();
        // Independent check: every (a, b) with a ∈ {2,3}, b ∈ {6,7}.
        let direct_loss = |cps: &[usize]| -> f64 {
            let mut bounds = vec![0];
            bounds.extend_from_slice(cps);
            bounds.push(10);
            bounds
                .windows(2)
                .map(|w| {
                    let s = &xs[w[0]..w[1]];
                    let m = s.iter().sum::<f64>() / s.len() as f64;
                    s.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                })
                .sum()
        };
        let mut best = (f64::INFINITY, vec![]);
        for a in [2, 3] {
            for b in [6, 7] {
                let l = direct_loss(&[a, b]);
                if l < best.0 {
                    best = (l, vec![a, b]);
                }
            }
        }
        assert_eq!(fit.changepoints, best.1);
        assert!((fit.cost - best.0).abs() < 1e-9);
        for l in &ls {
            assert_eq!(count_changes(&fit.changepoints, l.start, l.end), 1);
        }
    }

    #[test]
    fn negative_positions_are_never_candidates() {
        let ls = labels(&[(2, 5, 0), (5, 8, 1), (9, 12, 0)], 15);
        let mut t_set: Vec<usize> = Vec::new();
        for t in 1..=15 {
            t_set = candidate_set_update(&t_set, t, &ls);
            assert!(t_set.iter().all(|c| !ls.in_negative_region(*c)));
            if !ls.in_negative_region(t) {
                assert!(!t_set.is_empty());
            }
        }
    }

    #[test]
    fn rejects_bad_penalty_and_mismatched_labels() {
        let x = seq(&[1.0, 2.0]);
        assert!(opart(&x, -1.0).is_err());
        assert!(opart(&x, f64::NAN).is_err());
        assert!(lopart(&x, &LabelSet::empty(3), 1.0).is_err());
    }

    #[test]
    fn penalty_parsing() {
        assert_eq!("inf".parse::<Penalty>().unwrap(), Penalty::Infinite);
        assert_eq!("2.5".parse::<Penalty>().unwrap(), Penalty::Finite(2.5));
        assert!("-1".parse::<Penalty>().is_err());
        assert!("abc".parse::<Penalty>().is_err());
    }

    #[test]
    fn segments_cover_the_sequence() {
        let x = seq(&[0.0, 0.0, 10.0, 10.0, 3.0]);
        let fit = opart(&x, 0.1).unwrap();
        let segs = fit.segments();
        assert_eq!(segs.first().unwrap().start, 1);
        assert_eq!(segs.last().unwrap().end, 5);
        for w in segs.windows(2) {
            assert_eq!(w[0].end + 1, w[1].start);
        }
    }
}
