// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exhaustive reference solver for small sequences.
//!
//! Enumerates every subset of change positions, keeps the ones consistent
//! with the labels and scores them by direct summation (no prefix sums), so
//! it shares no arithmetic path with the dynamic programs it checks.

use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::labels::{count_changes, LabelSet};
use crate::solver::{Penalty, Segmentation};

/// Largest sequence the exhaustive search accepts (`2^(N-1)` subsets).
pub const MAX_BRUTE_FORCE_LEN: usize = 16;

/// Near-equal costs are treated as ties and resolved like the dynamic programs do.
const TIE_TOLERANCE: f64 = 1e-12;

/// Globally optimal labeled segmentation by enumeration.
///
/// Ties go to the model whose last changepoint is smallest, recursively,
/// which is the order the DP's smallest-τ argmin produces.
pub fn brute_force_solve(
    seq: &DataSequence,
    labels: &LabelSet,
    penalty: f64,
) -> Result<Segmentation> {
    let n = seq.len();
    if n > MAX_BRUTE_FORCE_LEN {
        return Err(Error::TooLarge {
            n,
            max: MAX_BRUTE_FORCE_LEN,
        });
    }
    if !(penalty.is_finite() && penalty >= 0.0) {
        return Err(Error::InvalidPenalty(penalty));
    }
    let xs = seq.values();
    let mut feasible: Vec<(f64, Vec<usize>)> = Vec::new();
    for mask in 0u32..(1u32 << (n - 1)) {
        let cps: Vec<usize> = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        let consistent = labels
            .iter()
            .all(|l| count_changes(&cps, l.start, l.end) == l.changes as usize);
        if !consistent {
            continue;
        }
        let cost = direct_loss(xs, &cps) + penalty * cps.len() as f64;
        feasible.push((cost, cps));
    }
    assert!(!feasible.is_empty(), "valid labels always admit a segmentation");

    let best = feasible.iter().map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * best.abs().max(1.0);
    let (cost, cps) = feasible
        .into_iter()
        .filter(|(c, _)| *c <= best + tol)
        .min_by(|a, b| tie_key(&a.1).cmp(&tie_key(&b.1)))
        .expect("nonempty");
    Ok(Segmentation::from_changepoints(
        seq,
        cps,
        cost,
        Penalty::Finite(penalty),
    ))
}

/// Changepoints from last to first, terminated by the `0` "no more changes" marker.
fn tie_key(cps: &[usize]) -> Vec<usize> {
    cps.iter().rev().copied().chain(std::iter::once(0)).collect()
}

fn direct_loss(xs: &[f64], cps: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    for end in cps.iter().copied().chain(std::iter::once(xs.len())) {
        let seg = &xs[start..end];
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        total += seg.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        start = end;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_change_example() {
        let seq = DataSequence::new(vec![0.0, 0.0, 10.0]).unwrap();
        let ls = LabelSet::validate([(1i64, 3i64, 1i64)], 3).unwrap();
        let fit = brute_force_solve(&seq, &ls, 1.0).unwrap();
        assert_eq!(fit.changepoints, vec![2]);
        assert_eq!(fit.cost, 1.0);
    }

    #[test]
    fn unlabeled_step() {
        let seq = DataSequence::new(vec![1.0, 1.0, 5.0, 5.0]).unwrap();
        let fit = brute_force_solve(&seq, &LabelSet::empty(4), 1.0).unwrap();
        assert_eq!(fit.changepoints, vec![2]);
        assert_eq!(fit.means, vec![1.0, 5.0]);
        assert_eq!(fit.cost, 1.0);
    }

    #[test]
    fn negative_label_forces_single_segment() {
        let seq = DataSequence::new(vec![9.0, 0.0]).unwrap();
        let ls = LabelSet::validate([(1i64, 2i64, 0i64)], 2).unwrap();
        let fit = brute_force_solve(&seq, &ls, 0.0).unwrap();
        assert!(fit.changepoints.is_empty());
        assert_eq!(fit.means, vec![4.5]);
    }

    #[test]
    fn tie_break_prefers_smallest_last_change() {
        // [0, 1, 1, 0] at λ = 0.5: no change and {1, 3} both cost exactly 1.
        let seq = DataSequence::new(vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let fit = brute_force_solve(&seq, &LabelSet::empty(4), 0.5).unwrap();
        assert!(fit.changepoints.is_empty());
        assert_eq!(fit.cost, 1.0);
        let dp = crate::solver::opart(&seq, 0.5).unwrap();
        assert_eq!(dp.changepoints, fit.changepoints);
        assert_eq!(tie_key(&[1, 3]), vec![3, 1, 0]);
    }

    #[test]
    fn rejects_long_sequences() {
        let seq = DataSequence::new(vec![0.0; 17]).unwrap();
        assert!(matches!(
            brute_force_solve(&seq, &LabelSet::empty(17), 1.0),
            Err(Error::TooLarge { .. })
        ));
    }
}
