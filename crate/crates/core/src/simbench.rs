// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded data generators and the runtime-scaling benchmark.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cv::CorpusEntry;
use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::labels::{Label, LabelSet};
use crate::metrics::total_errors;
use crate::solver::{lopart, opart, Algorithm};

/// `n` i.i.d. standard normal draws, deterministic per `(n, seed)`.
pub fn simulate_normal(n: usize, seed: u64) -> Result<DataSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    DataSequence::new(values)
}

/// How positive labels are laid out for timing runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// `count` labels of `width`, one every `spacing` points starting at position 1.
    FixedCount {
        count: usize,
        width: usize,
        spacing: usize,
    },
    /// `⌊ratio · n⌋` labels spread evenly, each at most 9 wide.
    Density { ratio: f64 },
}

const DENSITY_LABEL_WIDTH: usize = 9;

pub fn generate_labels(n: usize, scheme: LabelScheme) -> Result<LabelSet> {
    let (count, width, spacing) = match scheme {
        LabelScheme::FixedCount {
            count,
            width,
            spacing,
        } => (count, width, spacing),
        LabelScheme::Density { ratio } => {
            if !(ratio.is_finite() && ratio >= 0.0) {
                return Err(Error::InvalidArgument(format!("label density must be ≥ 0, got {ratio}")));
            }
            let count = (ratio * n as f64).floor() as usize;
            if count == 0 {
                return Ok(LabelSet::empty(n));
            }
            let spacing = n / count;
            (count, DENSITY_LABEL_WIDTH.min(spacing.saturating_sub(1)), spacing)
        }
    };
    if count == 0 {
        return Ok(LabelSet::empty(n));
    }
    if width == 0 || spacing < width {
        return Err(Error::InvalidArgument(format!(
            "cannot place {count} labels of width {width} every {spacing} points"
        )));
    }
    let last_end = 1 + (count - 1) * spacing + width;
    if last_end > n {
        return Err(Error::InvalidArgument(format!(
            "{count} labels of width {width} every {spacing} points need {last_end} data points, have {n}"
        )));
    }
    let raw = (0..count).map(|i| {
        let start = 1 + i * spacing;
        Label::new(start, start + width, 1)
    });
    LabelSet::validate(raw.map(crate::labels::RawLabel::from), n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n_values: Vec<usize>,
    pub scheme: LabelScheme,
    /// Solvers to time; OPART is quadratic, so leave it out for large sizes.
    pub algorithms: Vec<Algorithm>,
    /// Data sets per size; quartiles need at least 3.
    pub repeats: usize,
    pub seed: u64,
    /// Each sample repeats the solve until at least this much time has passed.
    pub min_sample_seconds: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_values: vec![1_000, 10_000],
            scheme: LabelScheme::Density { ratio: 0.0 },
            algorithms: vec![Algorithm::Opart, Algorithm::Lopart],
            repeats: 5,
            seed: 1,
            min_sample_seconds: 0.002,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub m: usize,
    pub median_seconds: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Times OPART and LOPART over the configured sizes. Rows sorted by `(algorithm, n, m)`.
///
/// Each size gets one discarded warm-up solve, which is also checked: with no
/// labels both solvers must agree, and LOPART must satisfy every label.
pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<TimingRow>> {
    if config.repeats < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 repeats for quartiles, got {}",
            config.repeats
        )));
    }
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let labels = generate_labels(n, config.scheme)?;
        let data: Vec<DataSequence> = (0..config.repeats)
            .map(|r| simulate_normal(n, config.seed.wrapping_add(r as u64)))
            .collect::<Result<_>>()?;

        let warm_lopart = lopart(&data[0], &labels, 1.0)?;
        if config.algorithms.contains(&Algorithm::Opart) {
            let warm_opart = opart(&data[0], 1.0)?;
            if labels.is_empty() && warm_opart != warm_lopart {
                return Err(Error::InvalidArgument(format!(
                    "solvers disagree without labels at n={n}"
                )));
            }
        }
        if total_errors(&labels, &warm_lopart.changepoints).errors() != 0 {
            return Err(Error::InvalidArgument(format!("LOPART violated a label at n={n}")));
        }

        for &algorithm in &config.algorithms {
            let mut samples: Vec<f64> = data
                .iter()
                .map(|seq| {
                    time_solve(config.min_sample_seconds, || match algorithm {
                        Algorithm::Opart => opart(seq, 1.0).map(drop),
                        Algorithm::Lopart => lopart(seq, &labels, 1.0).map(drop),
                    })
                })
                .collect::<Result<_>>()?;
            samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.push(TimingRow {
                algorithm,
                n,
                m: labels.len(),
                median_seconds: quantile(&samples, 0.5),
                q25: quantile(&samples, 0.25),
                q75: quantile(&samples, 0.75),
            });
        }
    }
    rows.sort_by_key(|r| (r.algorithm, r.n, r.m));
    Ok(rows)
}

fn time_solve(min_seconds: f64, mut solve: impl FnMut() -> Result<()>) -> Result<f64> {
    let budget = Duration::from_secs_f64(min_seconds.max(0.0));
    let start = Instant::now();
    let mut count = 0u32;
    loop {
        solve()?;
        count += 1;
        if start.elapsed() >= budget {
            break;
        }
    }
    Ok(start.elapsed().as_secs_f64() / count as f64)
}

/// Linear-interpolation quantile of sorted samples.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Least-squares slope of `ln(median_seconds)` against `ln(n)` for one algorithm.
pub fn fit_slope(rows: &[TimingRow], algorithm: Algorithm) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.algorithm == algorithm)
        .map(|r| ((r.n as f64).ln(), r.median_seconds.ln()))
        .collect();
    let mut distinct: Vec<usize> = rows.iter().filter(|r| r.algorithm == algorithm).map(|r| r.n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Labeled piecewise-constant sequences for exercising the cross-validation pipeline.
///
/// Each sequence is split into `labels_per_sequence` blocks. Even blocks get
/// a true change at their center covered by a positive label; odd blocks stay
/// flat under a negative label, sometimes with an outlier inside it. Some
/// block boundaries carry extra unlabeled changes.
pub fn synthetic_corpus(
    sequences: usize,
    n: usize,
    labels_per_sequence: usize,
    seed: u64,
) -> Result<Vec<CorpusEntry>> {
    const HALF_WIDTH: usize = 5;
    if labels_per_sequence == 0 || n / labels_per_sequence < 2 * HALF_WIDTH + 4 {
        return Err(Error::InvalidArgument(format!(
            "{labels_per_sequence} labels do not fit in {n} data points"
        )));
    }
    let block = n / labels_per_sequence;
    (0..sequences)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let noise = Normal::new(0.0, 1.0).expect("valid sd");
            let mut changes = Vec::new();
            let mut raw = Vec::new();
            let mut outliers = Vec::new();
            for b in 0..labels_per_sequence {
                let center = b * block + block / 2;
                let start = center - HALF_WIDTH;
                let end = center + HALF_WIDTH;
                if b % 2 == 0 {
                    changes.push(rng.random_range(start + 1..end - 1));
                    raw.push(Label::new(start, end, 1));
                } else {
                    raw.push(Label::new(start, end, 0));
                    if rng.random_bool(0.5) {
                        outliers.push(rng.random_range(start + 1..end));
                    }
                }
                if b > 0 && rng.random_bool(0.5) {
                    changes.push(b * block);
                }
            }
            changes.sort_unstable();
            let mut level = 0.0;
            let mut next = changes.iter().peekable();
            let mut values = Vec::with_capacity(n);
            for t in 1..=n {
                values.push(level + noise.sample(&mut rng));
                if next.peek() == Some(&&t) {
                    next.next();
                    let jump: f64 = rng.random_range(1.5..4.0);
                    level += if rng.random_bool(0.5) { jump } else { -jump };
                }
            }
            for &o in &outliers {
                values[o - 1] += if rng.random_bool(0.5) { 6.0 } else { -6.0 };
            }
            let labels = LabelSet::validate(raw.into_iter().map(crate::labels::RawLabel::from), n)?;
            Ok(CorpusEntry {
                id: format!("seq{i:03}"),
                data: DataSequence::new(values)?,
                labels,
            })
        })
        .collect()
}

/// A 100-point sequence with a subtle step inside a positive label and an
/// outlier inside a negative label, where OPART at `λ = 10` misses the step
/// and splits off the outlier while LOPART follows both labels.
pub fn outlier_example() -> (DataSequence, LabelSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let noise = Normal::new(0.0, 0.3).expect("valid sd");
    let mut values: Vec<f64> = (1..=100)
        .map(|i| if i <= 50 { 7.0 } else { 7.5 } + noise.sample(&mut rng))
        .collect();
    values[85] = 13.0;
    let labels = LabelSet::validate([(10i64, 20i64, 0i64), (45, 55, 1), (80, 90, 0)], 100)
        .expect("static labels are valid");
    (DataSequence::new(values).expect("finite"), labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_draws_are_deterministic() {
        assert_eq!(simulate_normal(50, 9).unwrap(), simulate_normal(50, 9).unwrap());
        assert_ne!(simulate_normal(50, 9).unwrap(), simulate_normal(50, 10).unwrap());
        assert!(simulate_normal(1, 3).unwrap().values()[0].is_finite());
    }

    #[test]
    fn normal_moments() {
        let seq = simulate_normal(100_000, 42).unwrap();
        let n = seq.len() as f64;
        let mean = seq.values().iter().sum::<f64>() / n;
        let var = seq.values().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn fixed_count_layout() {
        let ls = generate_labels(100, LabelScheme::FixedCount { count: 3, width: 9, spacing: 10 }).unwrap();
        assert_eq!(ls.labels(), &[Label::new(1, 10, 1), Label::new(11, 20, 1), Label::new(21, 30, 1)]);
        assert!(generate_labels(25, LabelScheme::FixedCount { count: 3, width: 9, spacing: 10 }).is_err());
    }

    #[test]
    fn density_layout() {
        assert!(generate_labels(1000, LabelScheme::Density { ratio: 0.0 }).unwrap().is_empty());
        let ls = generate_labels(10_000, LabelScheme::Density { ratio: 0.001 }).unwrap();
        assert_eq!(ls.len(), 10);
        let dense = generate_labels(1000, LabelScheme::Density { ratio: 0.1 }).unwrap();
        assert_eq!(dense.len(), 100);
        assert!(dense.iter().all(|l| l.end - l.start == 9));
        assert!(generate_labels(100, LabelScheme::Density { ratio: 1.0 }).is_err());
    }

    #[test]
    fn slope_of_exact_power_laws() {
        let rows = |power: f64| -> Vec<TimingRow> {
            [100usize, 1000, 10_000]
                .iter()
                .map(|&n| {
                    let t = 3e-9 * (n as f64).powf(power);
                    TimingRow { algorithm: Algorithm::Opart, n, m: 0, median_seconds: t, q25: t, q75: t }
                })
                .collect()
        };
        assert!((fit_slope(&rows(2.0), Algorithm::Opart).unwrap() - 2.0).abs() < 1e-6);
        assert!((fit_slope(&rows(1.0), Algorithm::Opart).unwrap() - 1.0).abs() < 1e-6);
        assert!(fit_slope(&rows(1.0)[..2], Algorithm::Opart).is_err());
    }

    #[test]
    fn quartiles_are_ordered() {
        let cfg = BenchConfig { n_values: vec![200, 400], repeats: 3, min_sample_seconds: 0.0, ..Default::default() };
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.q25 <= r.median_seconds && r.median_seconds <= r.q75));
        assert!(run_benchmark(&BenchConfig { repeats: 2, ..cfg }).is_err());
    }

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let a = synthetic_corpus(3, 200, 4, 7).unwrap();
        let b = synthetic_corpus(3, 200, 4, 7).unwrap();
        assert_eq!(a, b);
        for e in &a {
            assert_eq!(e.data.len(), 200);
            assert_eq!(e.labels.len(), 4);
        }
    }

    #[test]
    fn outlier_example_separates_solvers() {
        let (seq, labels) = outlier_example();
        let o = opart(&seq, 10.0).unwrap();
        let l = lopart(&seq, &labels, 10.0).unwrap();
        let oc = total_errors(&labels, &o.changepoints);
        assert!(oc.fp >= 1 && oc.fn_ >= 1, "{oc:?} {:?}", o.changepoints);
        assert_eq!(total_errors(&labels, &l.changepoints).errors(), 0);
    }
}
