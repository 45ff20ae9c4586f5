// SPDX-License-Identifier: MIT OR Apache-2.0

//! Runtime of OPART (quadratic) against LOPART with dense labels (close to linear).
//!
//! `cargo run --release --example timing_scaling`

use lopart::simbench::{fit_slope, run_benchmark, BenchConfig, LabelScheme};
use lopart::Algorithm;

fn main() -> lopart::Result<()> {
    let opart_rows = run_benchmark(&BenchConfig {
        n_values: vec![500, 1_000, 2_000, 4_000],
        algorithms: vec![Algorithm::Opart],
        ..BenchConfig::default()
    })?;
    let lopart_rows = run_benchmark(&BenchConfig {
        n_values: vec![1_000, 4_000, 16_000, 64_000],
        scheme: LabelScheme::Density { ratio: 0.1 },
        algorithms: vec![Algorithm::Lopart],
        ..BenchConfig::default()
    })?;

    println!("{:<7} {:>6} {:>5} {:>12}", "alg", "n", "m", "median (ms)");
    for r in opart_rows.iter().chain(&lopart_rows) {
        println!("{:<7} {:>6} {:>5} {:>12.3}", r.algorithm.to_string(), r.n, r.m, r.median_seconds * 1e3);
    }
    println!("\nlog-log slope opart  {:.2}", fit_slope(&opart_rows, Algorithm::Opart)?);
    println!("log-log slope lopart {:.2}", fit_slope(&lopart_rows, Algorithm::Lopart)?);
    Ok(())
}
