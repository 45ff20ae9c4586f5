// SPDX-License-Identifier: MIT OR Apache-2.0

//! Write a seeded synthetic corpus in the on-disk format the `lopart` binary reads.
//!
//! `cargo run --example generate_corpus -- out/corpus`
//! then e.g. `lopart cv --data out/corpus --out out/report.csv`

use std::path::PathBuf;

use lopart::io::{read_corpus, write_corpus};
use lopart::simbench::synthetic_corpus;

fn main() -> lopart::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    let corpus = synthetic_corpus(20, 200, 4, 1)?;
    write_corpus(&dir, &corpus)?;

    // Reading it back gives the same sequences.
    let again = read_corpus(&dir)?;
    assert_eq!(again.len(), corpus.len());
    let labels: usize = again.iter().map(|e| e.labels.len()).sum();
    println!("wrote {} sequences, {labels} labels to {}", again.len(), dir.display());
    Ok(())
}
