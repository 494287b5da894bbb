//! Score clustering quality against a hand-annotated topic sheet.
//!
//! Run with: cargo run --example coherence_scoring

use std::collections::BTreeMap;

use reviewmine::report::{coherence, AnnotationRow, AnnotationSheet};
use reviewmine::simcluster::{Cluster, ClusterParams, ClusteringResult};

fn main() {
    let result = ClusteringResult {
        params: ClusterParams::default(),
        pool_size: 5,
        clusters: vec![Cluster {
            representative_id: "r0".into(),
            representative_text: "billing was wrong".into(),
            member_ids: vec!["r1".into(), "r2".into(), "r3".into(), "r4".into()],
            weight: 4,
            threshold_used: 0.70,
            iteration: 0,
        }],
        residual_ids: Vec::new(),
    };

    // four of five annotators' labels agree with the cluster topic
    let rows = (0..5)
        .map(|i| AnnotationRow {
            review_id: format!("r{i}"),
            review_text: format!("review {i}"),
            cluster_id: "r0".into(),
            primary_topic: if i == 3 { "waiting" } else { "billing" }.into(),
            secondary_topic: String::new(),
        })
        .collect();
    let sheet = AnnotationSheet { rows };
    let topics: BTreeMap<String, String> = [("r0".to_string(), "billing".to_string())].into();

    let score = coherence(&result, &sheet, &topics, 0.8).unwrap();
    for cluster in &score.per_cluster {
        println!(
            "{}: {}/{} matched ({:.0}%)",
            cluster.cluster_id,
            cluster.matched,
            cluster.total,
            cluster.fraction * 100.0
        );
    }
    println!("passes the 80% bar: {}", score.overall_pass);
}
