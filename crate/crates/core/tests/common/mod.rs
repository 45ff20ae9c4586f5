// SPDX-License-Identifier: MIT OR Apache-2.0
#![allow(dead_code)]

use lopart::{DataSequence, LabelSet, RawLabel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Piecewise-constant data plus noise; continuous, so exact cost ties are negligible.
pub fn random_data(rng: &mut ChaCha8Rng, n: usize) -> DataSequence {
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut level = 0.0;
    let values = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                level = rng.random_range(-5.0..5.0);
            }
            level + noise.sample(rng)
        })
        .collect();
    DataSequence::new(values).unwrap()
}

/// Up to `m` labels from distinct sorted random endpoints.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LabelSet {
    let m = m.min(n / 2);
    let mut ends: Vec<usize> = rand::seq::index::sample(rng, n, 2 * m).into_iter().map(|i| i + 1).collect();
    ends.sort_unstable();
    // Sometimes let neighbouring labels share an endpoint.
    for i in (2..ends.len()).step_by(2) {
        if rng.random_bool(0.25) {
            ends[i] = ends[i - 1];
        }
    }
    let raw: Vec<RawLabel> = ends
        .chunks(2)
        .map(|p| {
            let positive = rng.random_bool(0.5);
            RawLabel {
                start: p[0] as i64,
                end: p[1] as i64,
                changes: positive as i64,
            }
        })
        .collect();
    LabelSet::validate(raw, n).unwrap()
}

pub fn instance(rng: &mut ChaCha8Rng, n_range: std::ops::RangeInclusive<usize>, m_max: usize) -> (DataSequence, LabelSet) {
    let n = rng.random_range(n_range);
    let m = rng.random_range(0..=m_max);
    let data = random_data(rng, n);
    let labels = random_labels(rng, n, m);
    (data, labels)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
