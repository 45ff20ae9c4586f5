// SPDX-License-Identifier: MIT OR Apache-2.0

//! Two-fold cross-validation over labels, comparing OPART, LOPART and the
//! infinite-penalty baseline.
//!
//! `cargo run --example cross_validation [-- report.csv]`

use std::collections::BTreeMap;

use lopart::cv::{run_cv, CvConfig};
use lopart::simbench::synthetic_corpus;
use lopart::ErrorCounts;

fn main() -> lopart::Result<()> {
    let corpus = synthetic_corpus(20, 200, 4, 2024)?;
    let report = run_cv(&corpus, &CvConfig::default())?;

    let mut totals: BTreeMap<(String, String), (ErrorCounts, ErrorCounts)> = BTreeMap::new();
    for row in &report.rows {
        let t = totals
            .entry((row.penalty_method.to_string(), row.algorithm.to_string()))
            .or_default();
        t.0 += row.train;
        t.1 += row.test;
    }
    println!("{:<10} {:<9} {:>12} {:>11}", "penalty", "algorithm", "train errors", "test errors");
    for ((method, alg), (train, test)) in &totals {
        println!("{method:<10} {alg:<9} {:>12} {:>11}", train.errors(), test.errors());
    }

    println!();
    for r in &report.roc {
        if let Some(auc) = r.curve.auc {
            println!("split {} {:<9} {:<7} AUC {auc:.3}", r.split, r.method, r.algorithm.to_string());
        }
    }

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, report.to_csv(6)).map_err(|e| lopart::Error::InvalidArgument(format!("{path}: {e}")))?;
        println!("\nwrote {path}");
    }
    Ok(())
}
