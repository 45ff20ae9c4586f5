// SPDX-License-Identifier: MIT OR Apache-2.0

//! Unconstrained segmentation of a noisy step signal at several penalties.
//!
//! `cargo run --example solve_opart`

use lopart::opart;
use lopart::simbench::simulate_normal;
use lopart::DataSequence;

fn main() -> lopart::Result<()> {
    // Means 0, 3, -1 on blocks of 40 points, plus unit noise.
    let noise = simulate_normal(120, 7)?;
    let values: Vec<f64> = noise
        .values()
        .iter()
        .enumerate()
        .map(|(i, e)| e + [0.0, 3.0, -1.0][i / 40])
        .collect();
    let seq = DataSequence::new(values)?;

    for penalty in [0.1, 2.0, 10.0, 50.0, 500.0] {
        let fit = opart(&seq, penalty)?;
        println!(
            "penalty {penalty:>6}: {:>3} changes, cost {:>9.3}, first few {:?}",
            fit.changepoints.len(),
            fit.cost,
            &fit.changepoints[..fit.changepoints.len().min(6)]
        );
    }

    let fit = opart(&seq, 10.0)?;
    println!("\nsegments at penalty 10:");
    for s in fit.segments() {
        println!("  {:>3}..={:<3} mean {:+.3}", s.start, s.end, s.mean);
    }
    Ok(())
}
