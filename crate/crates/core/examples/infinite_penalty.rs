// SPDX-License-Identifier: MIT OR Apache-2.0

//! With an infinite penalty LOPART puts exactly one change in every positive
//! label and nothing anywhere else.
//!
//! `cargo run --example infinite_penalty`

use lopart::{solve, Algorithm, DataSequence, LabelSet, Penalty};

fn main() -> lopart::Result<()> {
    let seq = DataSequence::new(vec![1.0, 1.2, 0.9, 5.0, 5.1, 4.8, 2.0, 2.1, 9.0, 9.2, 8.9, 9.1])?;
    let labels = LabelSet::validate([(2i64, 5i64, 1i64), (6, 8, 0), (8, 10, 1)], seq.len())?;

    let fit = solve(&seq, &labels, Penalty::Infinite, Algorithm::Lopart)?;
    println!("changepoints {:?}", fit.changepoints);
    println!("square loss {:.4}", fit.cost);
    for s in fit.segments() {
        println!("  {}..={} mean {:.3}", s.start, s.end, s.mean);
    }

    // OPART has no labels to follow, so an infinite penalty leaves one segment.
    let flat = solve(&seq, &labels, Penalty::Infinite, Algorithm::Opart)?;
    println!("opart changepoints {:?}", flat.changepoints);
    Ok(())
}
