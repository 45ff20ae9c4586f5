// SPDX-License-Identifier: MIT OR Apache-2.0

//! Cross-validation over labels: fold assignment, best-penalty analysis,
//! predicted-penalty analysis and report emission.
//!
//! Folds split the *labels* of each sequence, not the sequences. For split
//! `s`, labels in fold `s` are the test set and the rest are the train set.
//! OPART never sees labels; LOPART and the infinite-penalty baseline
//! ("segannot") are constrained by the train labels only.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::io::format_number;
use crate::labels::LabelSet;
use crate::metrics::{roc_curve, total_errors, ErrorCounts, RocCurve};
use crate::penalty::{compute_error_curve, penalty_grid, predict_penalty, train_model, Method};
use crate::solver::{lopart, lopart_infinite, opart, Penalty, Segmentation};

/// One labeled sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub data: DataSequence,
    pub labels: LabelSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldMode {
    Random,
    Sequential,
}

impl FromStr for FoldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(FoldMode::Random),
            "sequential" => Ok(FoldMode::Sequential),
            other => Err(Error::InvalidArgument(format!(
                "fold mode must be random or sequential, got {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub sequence_id: String,
    /// Fold (1-based) of each label, in label order.
    pub folds: Vec<usize>,
    pub k: usize,
    pub mode: FoldMode,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn train(&self, labels: &LabelSet, split: usize) -> LabelSet {
        labels.subset(|i| self.folds[i] != split)
    }

    pub fn test(&self, labels: &LabelSet, split: usize) -> LabelSet {
        labels.subset(|i| self.folds[i] == split)
    }
}

/// Assign each label to one of `k` folds; every fold receives at least one label.
pub fn assign_folds(
    sequence_id: &str,
    labels: &LabelSet,
    k: usize,
    mode: FoldMode,
    seed: u64,
) -> Result<FoldAssignment> {
    let m = labels.len();
    if k == 0 || m < k {
        return Err(Error::InvalidArgument(format!(
            "sequence {sequence_id}: {m} labels cannot fill {k} folds"
        )));
    }
    let folds = match mode {
        FoldMode::Sequential => (0..m).map(|i| i * k / m + 1).collect(),
        FoldMode::Random => {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut folds = vec![0; m];
            for (pos, &label) in order.iter().enumerate() {
                folds[label] = pos % k + 1;
            }
            folds
        }
    };
    Ok(FoldAssignment {
        sequence_id: sequence_id.to_owned(),
        folds,
        k,
        mode,
        seed,
    })
}

/// Models compared in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Lopart,
    Opart,
    /// LOPART at infinite penalty: changes only inside positive train labels.
    Segannot,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::Lopart, Baseline::Opart, Baseline::Segannot];

    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Lopart => "lopart",
            Baseline::Opart => "opart",
            Baseline::Segannot => "segannot",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the penalty of a report row was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltySource {
    /// Grid penalty minimizing train + test errors.
    Best,
    Predicted(Method),
}

impl fmt::Display for PenaltySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySource::Best => f.write_str("best"),
            PenaltySource::Predicted(m) => f.write_str(m.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub sequence_id: String,
    pub split: usize,
    pub algorithm: Baseline,
    pub penalty_method: PenaltySource,
    pub penalty: Penalty,
    pub train: ErrorCounts,
    pub test: ErrorCounts,
}

impl ReportRow {
    fn sort_key(&self) -> (&str, usize, PenaltySource, Baseline) {
        (&self.sequence_id, self.split, self.penalty_method, self.algorithm)
    }
}

/// ROC curve of one (split, method, algorithm), traced by scaling every
/// predicted penalty by a common factor `10^o`, `o ∈ {-5, -4.5, …, 5}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RocSummary {
    pub split: usize,
    pub method: Method,
    pub algorithm: Baseline,
    pub curve: RocCurve,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub roc: Vec<RocSummary>,
}

pub const REPORT_HEADER: &str = "sequence_id,split,algorithm,penalty_method,penalty,\
train_fp,train_fn,train_tp,train_labels,train_positive,\
test_fp,test_fn,test_tp,test_labels,test_positive";

fn format_penalty(p: Penalty, digits: usize) -> String {
    match p {
        Penalty::Finite(v) => format_number(v, digits),
        Penalty::Infinite => "inf".into(),
    }
}

fn counts_csv(c: &ErrorCounts) -> String {
    format!("{},{},{},{},{}", c.fp, c.fn_, c.tp, c.labels, c.positive_labels)
}

impl ExperimentReport {
    fn normalize(&mut self) {
        self.rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        self.roc.sort_by_key(|r| (r.split, r.method, r.algorithm));
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.sequence_id,
                r.split,
                r.algorithm,
                r.penalty_method,
                format_penalty(r.penalty, digits),
                counts_csv(&r.train),
                counts_csv(&r.test)
            ));
        }
        out
    }

    /// `split,method,algorithm,scale,tpr,fpr` rows, then one `auc` row per curve.
    pub fn roc_to_csv(&self, digits: usize) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format_number(x, digits));
        let mut out = String::from("split,method,algorithm,scale,tpr,fpr\n");
        for s in &self.roc {
            for p in &s.curve.points {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    s.split,
                    s.method,
                    s.algorithm,
                    format_number(p.penalty, digits),
                    opt(p.tpr),
                    opt(p.fpr)
                ));
            }
        }
        out.push_str("split,method,algorithm,auc\n");
        for s in &self.roc {
            out.push_str(&format!("{},{},{},{}\n", s.split, s.method, s.algorithm, opt(s.curve.auc)));
        }
        out
    }

    pub fn rows_for(&self, source: PenaltySource) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.penalty_method == source)
    }
}

/// Index of the minimal value, ties toward the larger index (larger penalty).
fn argmin_last(totals: impl IntoIterator<Item = usize>) -> usize {
    let mut best = (usize::MAX, 0);
    for (k, t) in totals.into_iter().enumerate() {
        if t <= best.0 {
            best = (t, k);
        }
    }
    best.1
}

fn evaluate(fit: &Segmentation, train: &LabelSet, test: &LabelSet) -> (ErrorCounts, ErrorCounts) {
    (
        total_errors(train, &fit.changepoints),
        total_errors(test, &fit.changepoints),
    )
}

/// For every split and algorithm, the grid penalty minimizing train + test
/// errors (ties toward larger `λ`). The infinite-penalty baseline has no grid.
pub fn best_penalty_analysis(
    entry: &CorpusEntry,
    assignment: &FoldAssignment,
    algorithms: &[Baseline],
) -> Result<Vec<ReportRow>> {
    let grid = penalty_grid();
    let opart_fits = if algorithms.contains(&Baseline::Opart) {
        grid.iter().map(|&l| opart(&entry.data, l)).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    for split in 1..=assignment.k {
        let train = assignment.train(&entry.labels, split);
        let test = assignment.test(&entry.labels, split);
        for &algorithm in algorithms {
            let (penalty, (tr, te)) = match algorithm {
                Baseline::Segannot => {
                    let fit = lopart_infinite(&entry.data, &train)?;
                    (Penalty::Infinite, evaluate(&fit, &train, &test))
                }
                Baseline::Opart | Baseline::Lopart => {
                    let evals: Vec<(ErrorCounts, ErrorCounts)> = match algorithm {
                        Baseline::Opart => opart_fits.iter().map(|f| evaluate(f, &train, &test)).collect(),
                        _ => grid
                            .iter()
                            .map(|&l| lopart(&entry.data, &train, l).map(|f| evaluate(&f, &train, &test)))
                            .collect::<Result<_>>()?,
                    };
                    let k = argmin_last(evals.iter().map(|(a, b)| a.errors() + b.errors()));
                    (Penalty::Finite(grid[k]), evals[k])
                }
            };
            rows.push(ReportRow {
                sequence_id: entry.id.clone(),
                split,
                algorithm,
                penalty_method: PenaltySource::Best,
                penalty,
                train: tr,
                test: te,
            });
        }
    }
    Ok(rows)
}

/// Multipliers applied to predicted penalties when tracing ROC curves.
pub fn roc_scales() -> Vec<f64> {
    penalty_grid()
}

/// Fit each penalty method on the train labels of every sequence (via
/// OPART error curves), predict a penalty per sequence, and score OPART,
/// LOPART and the infinite-penalty baseline on the test labels.
pub fn predicted_penalty_analysis(
    corpus: &[CorpusEntry],
    assignments: &[FoldAssignment],
    methods: &[Method],
) -> Result<ExperimentReport> {
    if corpus.is_empty() || corpus.len() != assignments.len() {
        return Err(Error::InvalidArgument("corpus and fold assignments must be nonempty and aligned".into()));
    }
    let k = assignments[0].k;
    let mut report = ExperimentReport::default();
    for split in 1..=k {
        let train: Vec<LabelSet> = corpus
            .iter()
            .zip(assignments)
            .map(|(e, a)| a.train(&e.labels, split))
            .collect();
        let test: Vec<LabelSet> = corpus
            .iter()
            .zip(assignments)
            .map(|(e, a)| a.test(&e.labels, split))
            .collect();
        let curves = corpus
            .par_iter()
            .zip(train.par_iter())
            .map(|(e, tr)| compute_error_curve(e.id.clone(), &e.data, tr))
            .collect::<Result<Vec<_>>>()?;
        let segannot: Vec<Segmentation> = corpus
            .par_iter()
            .zip(train.par_iter())
            .map(|(e, tr)| lopart_infinite(&e.data, tr))
            .collect::<Result<_>>()?;

        for &method in methods {
            let model = train_model(&curves, method)?;
            let predicted: Vec<f64> = corpus
                .iter()
                .map(|e| predict_penalty(&model, e.data.len()))
                .collect::<Result<_>>()?;

            let per_seq = corpus
                .par_iter()
                .enumerate()
                .map(|(i, e)| -> Result<Vec<ReportRow>> {
                    let lambda = predicted[i];
                    let fits = [
                        (Baseline::Opart, Penalty::Finite(lambda), opart(&e.data, lambda)?),
                        (Baseline::Lopart, Penalty::Finite(lambda), lopart(&e.data, &train[i], lambda)?),
                        (Baseline::Segannot, Penalty::Infinite, segannot[i].clone()),
                    ];
                    Ok(fits
                        .into_iter()
                        .map(|(algorithm, penalty, fit)| {
                            let (tr, te) = evaluate(&fit, &train[i], &test[i]);
                            ReportRow {
                                sequence_id: e.id.clone(),
                                split,
                                algorithm,
                                penalty_method: PenaltySource::Predicted(method),
                                penalty,
                                train: tr,
                                test: te,
                            }
                        })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()?;
            report.rows.extend(per_seq.into_iter().flatten());

            for algorithm in [Baseline::Opart, Baseline::Lopart] {
                let points = roc_scales()
                    .into_iter()
                    .map(|scale| -> Result<(f64, ErrorCounts)> {
                        let totals = corpus
                            .par_iter()
                            .enumerate()
                            .map(|(i, e)| -> Result<ErrorCounts> {
                                let lambda = predicted[i] * scale;
                                let fit = match algorithm {
                                    Baseline::Opart => opart(&e.data, lambda)?,
                                    _ => lopart(&e.data, &train[i], lambda)?,
                                };
                                Ok(total_errors(&test[i], &fit.changepoints))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok((scale, totals.into_iter().sum()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                report.roc.push(RocSummary {
                    split,
                    method,
                    algorithm,
                    curve: roc_curve(&points)?,
                });
            }
        }
    }
    report.normalize();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub mode: FoldMode,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 2,
            mode: FoldMode::Random,
            seed: 1,
            methods: Method::ALL.to_vec(),
        }
    }
}

/// Per-sequence fold seed: the run seed mixed with an FNV-1a hash of the id.
fn sequence_seed(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

/// Full protocol: folds, best-penalty rows and predicted-penalty rows plus ROC curves.
pub fn run_cv(corpus: &[CorpusEntry], config: &CvConfig) -> Result<ExperimentReport> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    let assignments = corpus
        .iter()
        .map(|e| assign_folds(&e.id, &e.labels, config.k, config.mode, sequence_seed(config.seed, &e.id)))
        .collect::<Result<Vec<_>>>()?;
    let best = corpus
        .par_iter()
        .zip(assignments.par_iter())
        .map(|(e, a)| best_penalty_analysis(e, a, &Baseline::ALL))
        .collect::<Result<Vec<_>>>()?;
    let mut report = predicted_penalty_analysis(corpus, &assignments, &config.methods)?;
    report.rows.extend(best.into_iter().flatten());
    report.normalize();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Label;

    fn labels(m: usize) -> LabelSet {
        LabelSet::validate((0..m).map(|i| Label::new(1 + 10 * i, 5 + 10 * i, (i % 2) as u8)).map(crate::labels::RawLabel::from), 10 * m + 5).unwrap()
    }

    #[test]
    fn sequential_halves() {
        let a = assign_folds("s", &labels(4), 2, FoldMode::Sequential, 0).unwrap();
        assert_eq!(a.folds, vec![1, 1, 2, 2]);
    }

    #[test]
    fn two_labels_one_per_fold() {
        for mode in [FoldMode::Random, FoldMode::Sequential] {
            for seed in 0..10 {
                let mut f = assign_folds("s", &labels(2), 2, mode, seed).unwrap().folds;
                f.sort();
                assert_eq!(f, vec![1, 2]);
            }
        }
    }

    #[test]
    fn random_is_deterministic_and_nonempty() {
        let ls = labels(7);
        for seed in 0..20 {
            let a = assign_folds("s", &ls, 3, FoldMode::Random, seed).unwrap();
            assert_eq!(a, assign_folds("s", &ls, 3, FoldMode::Random, seed).unwrap());
            for fold in 1..=3 {
                assert!(a.folds.contains(&fold));
            }
        }
    }

    #[test]
    fn too_few_labels() {
        assert!(assign_folds("s", &labels(1), 2, FoldMode::Random, 0).is_err());
    }

    #[test]
    fn train_and_test_partition_labels() {
        let ls = labels(5);
        let a = assign_folds("s", &ls, 2, FoldMode::Random, 4).unwrap();
        for split in 1..=2 {
            let tr = a.train(&ls, split);
            let te = a.test(&ls, split);
            assert_eq!(tr.len() + te.len(), 5);
            assert!(tr.iter().all(|l| !te.labels().contains(l)));
        }
    }

    #[test]
    fn argmin_prefers_larger_index() {
        assert_eq!(argmin_last([2, 0, 1, 0, 3]), 3);
        assert_eq!(argmin_last([0, 0, 0]), 2);
    }
}
