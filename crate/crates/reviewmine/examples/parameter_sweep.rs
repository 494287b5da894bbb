//! Run the (threshold, decline) grid sweep and print the resulting CSV.
//!
//! Run with: cargo run --example parameter_sweep

use reviewmine::embed::encode_local;
use reviewmine::simcluster::{default_sweep_grid, sweep};
use reviewmine::synth::{planted_corpus, SynthParams};

fn main() {
    let corpus = planted_corpus(&SynthParams::default(), 7);
    let vectors: Vec<_> = corpus
        .reviews
        .iter()
        .map(|r| encode_local(&r.text, 384))
        .collect();

    let (thresholds, declines) = default_sweep_grid();
    let table = sweep(&corpus, &vectors, &thresholds, &declines, 3, 10, true).unwrap();
    print!("{}", table.to_csv());
}
