// SPDX-License-Identifier: MIT OR Apache-2.0

//! Label error counts along the penalty grid and the resulting ROC curve.
//!
//! `cargo run --example label_errors_roc`

use lopart::metrics::roc_curve;
use lopart::penalty::penalty_grid;
use lopart::simbench::synthetic_corpus;
use lopart::{opart, total_errors, ErrorCounts};

fn main() -> lopart::Result<()> {
    let corpus = synthetic_corpus(10, 300, 6, 3)?;

    let mut path = Vec::new();
    println!("{:>10} {:>4} {:>4} {:>4} {:>7}", "penalty", "fp", "fn", "tp", "errors");
    for penalty in penalty_grid() {
        let mut total = ErrorCounts::default();
        for e in &corpus {
            total += total_errors(&e.labels, &opart(&e.data, penalty)?.changepoints);
        }
        println!("{penalty:>10.5} {:>4} {:>4} {:>4} {:>7}", total.fp, total.fn_, total.tp, total.errors());
        path.push((penalty, total));
    }

    let roc = roc_curve(&path)?;
    match roc.auc {
        Some(auc) => println!("\nAUC {auc:.4} over {} points", roc.points.len()),
        None => println!("\nno positive labels, AUC undefined"),
    }
    Ok(())
}
