//! Compare the iterative clustering loop against the single-pass baseline.
//!
//! The baseline never removes reviews from the pool, so its clusters may
//! overlap; the iterative loop produces a partition.
//!
//! Run with: cargo run --example baseline_comparison

use reviewmine::embed::encode_local;
use reviewmine::simcluster::{baseline_cluster, process_reviews, ClusterParams};
use reviewmine::synth::{planted_corpus, SynthParams};

fn main() {
    let corpus = planted_corpus(&SynthParams::default(), 11);
    let vectors: Vec<_> = corpus
        .reviews
        .iter()
        .map(|r| encode_local(&r.text, 384))
        .collect();
    let params = ClusterParams::default();

    let iterative = process_reviews(&corpus, &vectors, &params).unwrap();
    println!("iterative:");
    for c in &iterative.clusters {
        println!("  {} -> {} members at {:.2}", c.representative_id, c.weight, c.threshold_used);
    }

    let baseline = baseline_cluster(&corpus, &vectors, params.thr0, params.num_clusters).unwrap();
    println!("\nbaseline (overlap allowed):");
    for c in &baseline {
        println!("  {} -> {} members", c.representative_id, c.weight);
    }
}
