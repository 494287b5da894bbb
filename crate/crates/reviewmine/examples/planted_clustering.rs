//! Cluster a synthetic planted-topic corpus and print what was found.
//!
//! Run with: cargo run --example planted_clustering

use reviewmine::embed::encode_local;
use reviewmine::simcluster::{process_reviews, ClusterParams};
use reviewmine::synth::{planted_corpus, SynthParams};

fn main() {
    let corpus = planted_corpus(&SynthParams::default(), 42);
    println!("{}\n", corpus.provenance);

    let vectors: Vec<_> = corpus
        .reviews
        .iter()
        .map(|r| encode_local(&r.text, 384))
        .collect();
    let params = ClusterParams::default();
    let result = process_reviews(&corpus, &vectors, &params).unwrap();

    for cluster in &result.clusters {
        println!(
            "iteration {} (threshold {:.2}): {} members",
            cluster.iteration, cluster.threshold_used, cluster.weight
        );
        println!("  representative: {}", cluster.representative_text);
        for member in &cluster.member_ids {
            println!("  - {member}");
        }
    }
    println!("\n{} reviews left unclustered", result.residual_ids.len());
}
