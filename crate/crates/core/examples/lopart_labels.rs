// SPDX-License-Identifier: MIT OR Apache-2.0

//! Labels fix mistakes the unconstrained model makes.
//!
//! The data hide a small step inside a positive label and an outlier inside
//! a negative label. OPART misses the step and splits off the outlier;
//! LOPART honours both labels at the same penalty.
//!
//! `cargo run --example lopart_labels`

use lopart::metrics::label_outcomes;
use lopart::simbench::outlier_example;
use lopart::{lopart, opart};

fn main() -> lopart::Result<()> {
    let (seq, labels) = outlier_example();
    let penalty = 10.0;

    for (name, fit) in [("opart", opart(&seq, penalty)?), ("lopart", lopart(&seq, &labels, penalty)?)] {
        println!("{name}: changepoints {:?}, cost {:.3}", fit.changepoints, fit.cost);
        for o in label_outcomes(&labels, &fit.changepoints) {
            println!(
                "  label {} [{}, {}] wants {} change(s), has {} -> {}",
                o.label_index,
                o.start,
                o.end,
                o.changes,
                o.predicted_changes,
                o.status.as_str()
            );
        }
    }
    Ok(())
}
