// SPDX-License-Identifier: MIT OR Apache-2.0

//! Train the three penalty predictors and compare their choices.
//!
//! `cargo run --example penalty_learning`

use lopart::penalty::{compute_error_curve, predict_penalty, target_interval, train_model, Method, PenaltyModel};
use lopart::simbench::synthetic_corpus;

fn main() -> lopart::Result<()> {
    // Mixed lengths so the log-log feature actually varies.
    let mut corpus = Vec::new();
    for (k, n) in [100, 200, 400, 800].into_iter().enumerate() {
        corpus.extend(synthetic_corpus(4, n, 4, 10 + k as u64)?);
    }

    let curves = corpus
        .iter()
        .map(|e| compute_error_curve(format!("{}-{}", e.id, e.data.len()), &e.data, &e.labels))
        .collect::<lopart::Result<Vec<_>>>()?;
    for c in curves.iter().step_by(4) {
        let iv = target_interval(c)?;
        let (lo, hi) = iv.log10_bounds();
        println!("{:<12} n={:<4} log10 penalty target ({lo:.1}, {hi:.1})", c.sequence_id, c.n);
    }

    for method in Method::ALL {
        let model = train_model(&curves, method)?;
        let text = model.to_key_value();
        assert_eq!(PenaltyModel::from_key_value(&text)?, model);
        let shown: Vec<String> = [100, 1_000, 10_000]
            .iter()
            .map(|&n| predict_penalty(&model, n).map(|p| format!("n={n}: {p:.3}")))
            .collect::<lopart::Result<_>>()?;
        println!("\n{method}: {}\n  {}", text.trim().replace('\n', ", "), shown.join("  "));
    }
    Ok(())
}
