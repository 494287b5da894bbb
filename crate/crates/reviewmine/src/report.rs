//! Run artifacts: reports, annotation sheets, coherence scoring, and timing
//! benchmarks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::encode_local;
use crate::ingest::ReviewCorpus;
use crate::recommend::GenerationRecord;
use crate::simcluster::{
    baseline_cluster, process_reviews, word_level_baseline, Cluster, ClusterParams,
    ClusteringResult, WORD_LEVEL_DEFAULT_THRESHOLD,
};
use crate::synth::{planted_corpus, SynthParams};

/// Everything a pipeline run produced, ready for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    pub created_at: String,
    pub corpus_provenance: String,
    pub params: ClusterParams,
    pub clusters_with_recommendations: Vec<(Cluster, GenerationRecord)>,
    pub failures: Vec<(String, String)>,
}

/// One row per clustered review, topic columns left blank for annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSheet {
    pub rows: Vec<AnnotationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub review_id: String,
    pub review_text: String,
    pub cluster_id: String,
    pub primary_topic: String,
    pub secondary_topic: String,
}

/// Per-cluster annotation agreement fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScore {
    pub per_cluster: Vec<ClusterCoherence>,
    pub overall_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCoherence {
    pub cluster_id: String,
    pub matched: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("missing annotation rows for reviews: {}", .0.join(", "))]
    MissingAnnotations(Vec<String>),
    #[error("cluster {0} has no assigned topic")]
    MissingClusterTopic(String),
    #[error("serialization error: {0}")]
    Serde(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Output format of [`emit_run_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    Csv,
}

/// Render a run report.
///
/// JSON is the canonical lossless form (stable field order); Markdown renders
/// one section per cluster with its ISSUE/ADVICE pairs; CSV flattens one row
/// per (cluster, recommendation).
pub fn emit_run_report(report: &RunReport, format: ReportFormat) -> Result<Vec<u8>, ReportError> {
    match format {
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)
                .map_err(|e| ReportError::Serde(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        ReportFormat::Markdown => Ok(render_markdown(report).into_bytes()),
        ReportFormat::Csv => render_csv(report),
    }
}

fn render_markdown(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Run report {}\n\n", report.run_id));
    out.push_str(&format!("- created: {}\n", report.created_at));
    out.push_str(&format!("- corpus: {}\n", report.corpus_provenance));
    out.push_str(&format!(
        "- params: threshold {} decline {} clusters {}\n\n",
        report.params.thr0, report.params.thr_decline, report.params.num_clusters
    ));
    for (cluster, record) in &report.clusters_with_recommendations {
        out.push_str(&format!(
            "## Cluster {} (iteration {})\n\n",
            cluster.representative_id, cluster.iteration
        ));
        out.push_str(&format!(
            "- weight: {} | threshold: {:.3}\n\n",
            cluster.weight, cluster.threshold_used
        ));
        out.push_str(&format!("> {}\n\n", cluster.representative_text));
        if record.recommendations.is_empty() {
            out.push_str("_No structured recommendations parsed._\n\n");
        }
        for rec in &record.recommendations {
            out.push_str(&format!(
                "**ISSUE:** {}\n\n**ADVICE:** {}\n\n",
                rec.issue, rec.advice
            ));
        }
    }
    if !report.failures.is_empty() {
        out.push_str("## Failures\n\n");
        for (id, error) in &report.failures {
            out.push_str(&format!("- {id}: {error}\n"));
        }
    }
    out
}

fn render_csv(report: &RunReport) -> Result<Vec<u8>, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "representative_id",
        "iteration",
        "weight",
        "threshold_used",
        "issue",
        "advice",
    ])?;
    for (cluster, record) in &report.clusters_with_recommendations {
        for rec in &record.recommendations {
            writer.write_record([
                cluster.representative_id.as_str(),
                &cluster.iteration.to_string(),
                &cluster.weight.to_string(),
                &format!("{}", cluster.threshold_used),
                &rec.issue,
                &rec.advice,
            ])?;
        }
    }
    writer
        .into_inner()
        .map_err(|e| ReportError::Serde(e.to_string()))
}

pub const ANNOTATION_HEADER: &str = "review_id,review_text,cluster_id,primary_topic,secondary_topic";

/// Build an annotation sheet: one row per representative and member, topic
/// columns blank for annotators.
pub fn export_annotation_sheet(result: &ClusteringResult, corpus: &ReviewCorpus) -> AnnotationSheet {
    let texts: HashMap<&str, &str> = corpus
        .reviews
        .iter()
        .map(|r| (r.id.as_str(), r.text.as_str()))
        .collect();
    let mut rows = Vec::new();
    for cluster in &result.clusters {
        let cluster_id = cluster.representative_id.clone();
        rows.push(AnnotationRow {
            review_id: cluster.representative_id.clone(),
            review_text: cluster.representative_text.clone(),
            cluster_id: cluster_id.clone(),
            primary_topic: String::new(),
            secondary_topic: String::new(),
        });
        for member in &cluster.member_ids {
            rows.push(AnnotationRow {
                review_id: member.clone(),
                review_text: texts.get(member.as_str()).unwrap_or(&"").to_string(),
                cluster_id: cluster_id.clone(),
                primary_topic: String::new(),
                secondary_topic: String::new(),
            });
        }
    }
    AnnotationSheet { rows }
}

impl AnnotationSheet {
    pub fn to_csv(&self) -> Result<Vec<u8>, ReportError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record([
            "review_id",
            "review_text",
            "cluster_id",
            "primary_topic",
            "secondary_topic",
        ])?;
        for row in &self.rows {
            writer.write_record([
                &row.review_id,
                &row.review_text,
                &row.cluster_id,
                &row.primary_topic,
                &row.secondary_topic,
            ])?;
        }
        writer
            .into_inner()
            .map_err(|e| ReportError::Serde(e.to_string()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, ReportError> {
        let mut reader = csv::Reader::from_reader(bytes);
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            rows.push(AnnotationRow {
                review_id: record.get(0).unwrap_or("").to_string(),
                review_text: record.get(1).unwrap_or("").to_string(),
                cluster_id: record.get(2).unwrap_or("").to_string(),
                primary_topic: record.get(3).unwrap_or("").to_string(),
                secondary_topic: record.get(4).unwrap_or("").to_string(),
            });
        }
        Ok(AnnotationSheet { rows })
    }
}

fn topics_match(a: &str, b: &str) -> bool {
    a.trim().to_lowercase() == b.trim().to_lowercase()
}

/// Score annotation agreement per cluster.
///
/// A review counts as matched when its primary or secondary topic equals the
/// cluster's assigned topic (trimmed, case-folded string equality).
/// `overall_pass` requires every cluster's fraction to reach
/// `pass_threshold`.
pub fn coherence(
    result: &ClusteringResult,
    annotated: &AnnotationSheet,
    cluster_topics: &BTreeMap<String, String>,
    pass_threshold: f64,
) -> Result<CoherenceScore, ReportError> {
    let by_review: HashMap<&str, &AnnotationRow> = annotated
        .rows
        .iter()
        .map(|r| (r.review_id.as_str(), r))
        .collect();

    let mut missing = Vec::new();
    let mut per_cluster = Vec::new();
    for cluster in &result.clusters {
        let topic = cluster_topics
            .get(&cluster.representative_id)
            .ok_or_else(|| ReportError::MissingClusterTopic(cluster.representative_id.clone()))?;
        let mut matched = 0usize;
        let mut total = 0usize;
        let ids = std::iter::once(&cluster.representative_id).chain(cluster.member_ids.iter());
        for id in ids {
            match by_review.get(id.as_str()) {
                Some(row) => {
                    total += 1;
                    if topics_match(&row.primary_topic, topic)
                        || topics_match(&row.secondary_topic, topic)
                    {
                        matched += 1;
                    }
                }
                None => missing.push(id.clone()),
            }
        }
        per_cluster.push(ClusterCoherence {
            cluster_id: cluster.representative_id.clone(),
            matched,
            total,
            fraction: if total > 0 {
                matched as f64 / total as f64
            } else {
                0.0
            },
        });
    }
    if !missing.is_empty() {
        return Err(ReportError::MissingAnnotations(missing));
    }
    let overall_pass = per_cluster.iter().all(|c| c.fraction >= pass_threshold);
    Ok(CoherenceScore {
        per_cluster,
        overall_pass,
    })
}

/// Clustering method axis of the timing benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Iterative,
    Baseline,
    WordLevel,
}

impl BenchMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::Iterative => "iterative",
            BenchMethod::Baseline => "baseline",
            BenchMethod::WordLevel => "word_level",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "iterative" => Some(BenchMethod::Iterative),
            "baseline" => Some(BenchMethod::Baseline),
            "word_level" => Some(BenchMethod::WordLevel),
            _ => None,
        }
    }

    pub const ALL: [BenchMethod; 3] = [
        BenchMethod::Iterative,
        BenchMethod::Baseline,
        BenchMethod::WordLevel,
    ];
}

/// One timing observation: median seconds over the repetition count.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: BenchMethod,
    pub pool_size: usize,
    pub seconds: f64,
}

/// Time the clustering stage over seeded synthetic corpora.
///
/// Vectors are precomputed so only clustering is measured; embedding time is
/// excluded, which the CSV header documents. Methods run sequentially, with
/// the median of `repetitions` wall-clock timings reported.
pub fn bench(
    pool_sizes: &[usize],
    methods: &[BenchMethod],
    seed: u64,
    repetitions: usize,
) -> Vec<BenchRow> {
    assert!(repetitions >= 1);
    let mut rows = Vec::new();
    for &size in pool_sizes {
        assert!(size >= 2, "pool size must be >= 2");
        let corpus = sized_corpus(size, seed);
        let vectors: Vec<_> = corpus
            .reviews
            .iter()
            .map(|r| encode_local(&r.text, 384))
            .collect();
        for &method in methods {
            let mut timings = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let start = Instant::now();
                match method {
                    BenchMethod::Iterative => {
                        process_reviews(&corpus, &vectors, &ClusterParams::default()).unwrap();
                    }
                    BenchMethod::Baseline => {
                        baseline_cluster(&corpus, &vectors, 0.70, 10).unwrap();
                    }
                    BenchMethod::WordLevel => {
                        word_level_baseline(
                            &corpus,
                            &vectors,
                            WORD_LEVEL_DEFAULT_THRESHOLD,
                            10,
                        )
                        .unwrap();
                    }
                }
                timings.push(start.elapsed().as_secs_f64());
            }
            timings.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.push(BenchRow {
                method,
                pool_size: size,
                seconds: timings[timings.len() / 2],
            });
        }
    }
    rows
}

// Synthetic corpus scaled to exactly `size` reviews.
fn sized_corpus(size: usize, seed: u64) -> ReviewCorpus {
    let topics = 5.min(size);
    let topic_size = (size * 4 / 5 / topics).max(1);
    let mut corpus = planted_corpus(
        &SynthParams {
            num_topics: topics,
            topic_size,
            noise_reviews: size.saturating_sub(topics * topic_size),
        },
        seed,
    );
    corpus.reviews.truncate(size);
    corpus
}

/// Render benchmark rows as CSV. The leading comment line records that
/// embedding time is excluded from the measurements.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out =
        String::from("# clustering stage only; embedding time excluded\nmethod,pool_size,seconds\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.6}\n",
            row.method.name(),
            row.pool_size,
            row.seconds
        ));
    }
    out
}

/// Check that every non-failed cluster appears exactly once in the report.
pub fn validate_run_report(report: &RunReport) -> bool {
    let mut seen = HashSet::new();
    report
        .clusters_with_recommendations
        .iter()
        .all(|(c, r)| c.representative_id == r.representative_id && seen.insert(&c.representative_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommend::Recommendation;

    fn cluster(id: &str, members: &[&str], iteration: usize) -> Cluster {
        Cluster {
            representative_id: id.to_string(),
            representative_text: format!("text of {id}"),
            member_ids: members.iter().map(|m| m.to_string()).collect(),
            weight: members.len(),
            threshold_used: 0.70,
            iteration,
        }
    }

    fn record(id: &str, recs: usize) -> GenerationRecord {
        GenerationRecord {
            representative_id: id.to_string(),
            prompt: "p".into(),
            raw_response: "r".into(),
            recommendations: (0..recs)
                .map(|i| Recommendation {
                    issue: format!("issue {i}"),
                    advice: format!("advice {i}"),
                })
                .collect(),
            latency_ms: 1,
            model_name: "stub".into(),
            retries: 0,
        }
    }

    fn report_with(pairs: Vec<(Cluster, GenerationRecord)>) -> RunReport {
        RunReport {
            run_id: "test-run".into(),
            created_at: "1970-01-01T00:00:00Z".into(),
            corpus_provenance: "test".into(),
            params: ClusterParams::default(),
            clusters_with_recommendations: pairs,
            failures: Vec::new(),
        }
    }

    #[test]
    fn empty_report_is_valid_json() {
        let report = report_with(Vec::new());
        let bytes = emit_run_report(&report, ReportFormat::Json).unwrap();
        let parsed: RunReport = serde_json::from_slice(&bytes).unwrap();
        assert!(parsed.clusters_with_recommendations.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let mut report = report_with(vec![
            (cluster("a", &["b", "c"], 0), record("a", 2)),
            (cluster("d", &[], 1), record("d", 1)),
        ]);
        // latency and retry counts are volatile telemetry, not part of the
        // canonical form
        for (_, r) in &mut report.clusters_with_recommendations {
            r.latency_ms = 0;
            r.retries = 0;
        }
        let bytes = emit_run_report(&report, ReportFormat::Json).unwrap();
        let parsed: RunReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn csv_flattens_cluster_times_recommendation() {
        let pairs = (0..10)
            .map(|i| (cluster(&format!("c{i}"), &[], i), record(&format!("c{i}"), 2)))
            .collect();
        let bytes = emit_run_report(&report_with(pairs), ReportFormat::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        // header + 10 clusters x 2 recommendations
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn markdown_contains_issue_advice_sections() {
        let report = report_with(vec![(cluster("a", &["b"], 0), record("a", 1))]);
        let bytes = emit_run_report(&report, ReportFormat::Markdown).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("**ISSUE:** issue 0"));
        assert!(text.contains("**ADVICE:** advice 0"));
        assert!(text.contains("text of a"));
    }

    fn result_with(clusters: Vec<Cluster>) -> ClusteringResult {
        ClusteringResult {
            params: ClusterParams::default(),
            pool_size: clusters.iter().map(|c| c.size()).sum(),
            clusters,
            residual_ids: Vec::new(),
        }
    }

    fn corpus_for(result: &ClusteringResult) -> ReviewCorpus {
        let reviews = result
            .clusters
            .iter()
            .flat_map(|c| std::iter::once(&c.representative_id).chain(c.member_ids.iter()))
            .map(|id| crate::ingest::Review {
                id: id.clone(),
                text: format!("text of {id}"),
                rating: None,
                timestamp: None,
                source: None,
            })
            .collect();
        ReviewCorpus {
            reviews,
            provenance: "test".into(),
        }
    }

    #[test]
    fn annotation_sheet_counts_members_plus_representatives() {
        let result = result_with(vec![
            cluster("a", &["a1", "a2", "a3"], 0),
            cluster("b", &["b1", "b2", "b3", "b4"], 1),
        ]);
        let sheet = export_annotation_sheet(&result, &corpus_for(&result));
        assert_eq!(sheet.rows.len(), 9);
    }

    #[test]
    fn zero_weight_cluster_gets_one_row() {
        let result = result_with(vec![cluster("solo", &[], 0)]);
        let sheet = export_annotation_sheet(&result, &corpus_for(&result));
        assert_eq!(sheet.rows.len(), 1);
        assert_eq!(sheet.rows[0].review_id, "solo");
    }

    #[test]
    fn annotation_csv_round_trip_preserves_topics() {
        let result = result_with(vec![cluster("a", &["a1"], 0)]);
        let mut sheet = export_annotation_sheet(&result, &corpus_for(&result));
        sheet.rows[0].primary_topic = "billing".into();
        sheet.rows[1].secondary_topic = "staff".into();
        let bytes = sheet.to_csv().unwrap();
        assert!(String::from_utf8_lossy(&bytes).starts_with(ANNOTATION_HEADER));
        let back = AnnotationSheet::from_csv(&bytes).unwrap();
        assert_eq!(back, sheet);
    }

    fn annotate(
        sheet: &mut AnnotationSheet,
        cluster_id: &str,
        primary_matches: usize,
        topic: &str,
    ) {
        let mut matched = 0;
        for row in sheet.rows.iter_mut().filter(|r| r.cluster_id == cluster_id) {
            if matched < primary_matches {
                row.primary_topic = topic.to_string();
                matched += 1;
            } else {
                row.primary_topic = "other".to_string();
            }
        }
    }

    #[test]
    fn coherence_fraction_arithmetic() {
        let result = result_with(vec![cluster("a", &["a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"], 0)]);
        let mut sheet = export_annotation_sheet(&result, &corpus_for(&result));
        annotate(&mut sheet, "a", 9, "billing");
        let topics: BTreeMap<String, String> = [("a".to_string(), "billing".to_string())].into();
        let score = coherence(&result, &sheet, &topics, 0.8).unwrap();
        assert_eq!(score.per_cluster[0].fraction, 0.9);
        assert!(score.overall_pass);
    }

    #[test]
    fn secondary_topic_counts_as_match() {
        let result = result_with(vec![cluster("a", &[], 0)]);
        let mut sheet = export_annotation_sheet(&result, &corpus_for(&result));
        sheet.rows[0].primary_topic = "other".into();
        sheet.rows[0].secondary_topic = "Billing".into();
        let topics: BTreeMap<String, String> = [("a".to_string(), "billing".to_string())].into();
        let score = coherence(&result, &sheet, &topics, 0.8).unwrap();
        assert_eq!(score.per_cluster[0].fraction, 1.0);
    }

    #[test]
    fn no_matches_fails_overall() {
        let result = result_with(vec![cluster("a", &["a1"], 0)]);
        let mut sheet = export_annotation_sheet(&result, &corpus_for(&result));
        annotate(&mut sheet, "a", 0, "billing");
        let topics: BTreeMap<String, String> = [("a".to_string(), "billing".to_string())].into();
        let score = coherence(&result, &sheet, &topics, 0.8).unwrap();
        assert_eq!(score.per_cluster[0].fraction, 0.0);
        assert!(!score.overall_pass);
    }

    #[test]
    fn missing_annotation_rows_are_fatal_with_ids() {
        let result = result_with(vec![cluster("a", &["a1"], 0)]);
        let sheet = AnnotationSheet { rows: Vec::new() };
        let topics: BTreeMap<String, String> = [("a".to_string(), "billing".to_string())].into();
        let err = coherence(&result, &sheet, &topics, 0.8).unwrap_err();
        match err {
            ReportError::MissingAnnotations(ids) => {
                assert_eq!(ids, vec!["a".to_string(), "a1".to_string()]);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn coherence_is_row_order_invariant() {
        let result = result_with(vec![cluster("a", &["a1", "a2"], 0)]);
        let mut sheet = export_annotation_sheet(&result, &corpus_for(&result));
        annotate(&mut sheet, "a", 2, "billing");
        let topics: BTreeMap<String, String> = [("a".to_string(), "billing".to_string())].into();
        let forward = coherence(&result, &sheet, &topics, 0.8).unwrap();
        sheet.rows.reverse();
        let reversed = coherence(&result, &sheet, &topics, 0.8).unwrap();
        assert_eq!(forward.per_cluster[0].fraction, reversed.per_cluster[0].fraction);
    }

    #[test]
    fn bench_emits_one_row_per_size_method() {
        let rows = bench(&[100], &[BenchMethod::Baseline, BenchMethod::Iterative], 42, 1);
        assert_eq!(rows.len(), 2);
        let csv = bench_csv(&rows);
        assert!(csv.contains("method,pool_size,seconds"));
        assert!(csv.starts_with('#'));
        assert!(csv.contains("baseline,100,"));
        assert!(csv.contains("iterative,100,"));
    }

    #[test]
    fn bench_outputs_are_seed_deterministic() {
        let corpus = sized_corpus(50, 42);
        let vectors: Vec<_> = corpus
            .reviews
            .iter()
            .map(|r| encode_local(&r.text, 384))
            .collect();
        let a = process_reviews(&corpus, &vectors, &ClusterParams::default()).unwrap();
        let b = process_reviews(&corpus, &vectors, &ClusterParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_report_validation_catches_duplicates() {
        let good = report_with(vec![(cluster("a", &[], 0), record("a", 1))]);
        assert!(validate_run_report(&good));
        let bad = report_with(vec![
            (cluster("a", &[], 0), record("a", 1)),
            (cluster("a", &[], 1), record("a", 1)),
        ]);
        assert!(!validate_run_report(&bad));
    }
}
