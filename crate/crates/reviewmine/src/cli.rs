//! Command-line entry point wiring the pipeline stages.
//!
//! Exit-code contract: 0 success, 2 config error, 3 IO error, 4 embedding
//! backend failure, 5 generation failure. Every command accepts `--config
//! <file>` plus flag overrides (flags win), and the effective config is
//! echoed into the output directory.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::embed::{self, BackendKind, EmbedError, EmbeddingBackendConfig};
use crate::ingest::{
    self, ColumnMapping, IngestError, ReviewCorpus, StopwordDetector,
};
use crate::recommend::{
    self, ChatClientConfig, PromptBudget, PromptTemplate, RecommendError,
};
use crate::report::{
    self, bench_csv, emit_run_report, BenchMethod, ReportFormat, RunReport,
};
use crate::simcluster::{
    self, baseline_cluster, default_sweep_grid, ClusterError, ClusterParams, ClusteringResult,
};
use crate::synth::{planted_corpus, SynthParams};

/// A CLI failure carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Embedding(String),
    Generation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Embedding(_) => 4,
            CliError::Generation(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Io(m)
            | CliError::Embedding(m)
            | CliError::Generation(m) => m,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::MissingColumn { .. } => CliError::Config(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Config(m) => CliError::Config(m),
            other => CliError::Embedding(other.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::InvalidParams(m) => CliError::Config(m),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<RecommendError> for CliError {
    fn from(e: RecommendError) -> Self {
        match e {
            RecommendError::Config(m) | RecommendError::Template(m) => CliError::Config(m),
            RecommendError::AllFailed(n) => {
                CliError::Generation(format!("all {n} generation requests failed"))
            }
            other => CliError::Generation(other.to_string()),
        }
    }
}

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

/// Aggregated pipeline configuration, loadable from a TOML file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub input: InputConfig,
    pub filter: FilterConfig,
    pub embedding: EmbeddingBackendConfig,
    pub cluster: ClusterParams,
    pub prompt: PromptConfig,
    pub chat: ChatClientConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct InputConfig {
    pub path: Option<PathBuf>,
    pub text_column: Option<String>,
    pub rating_column: Option<String>,
    pub timestamp_column: Option<String>,
    pub id_column: Option<String>,
    pub source_column: Option<String>,
    pub lenient: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub exclude_ratings: Vec<u8>,
    pub language: String,
    pub confidence_floor: f64,
    pub latest: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            exclude_ratings: vec![4, 5],
            language: "en".to_string(),
            confidence_floor: 0.5,
            latest: 300,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptConfig {
    pub template_path: Option<PathBuf>,
    pub budget: PromptBudget,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

#[derive(Parser)]
#[command(name = "reviewmine", version, about = "Mine recurring issues from customer reviews")]
pub struct Cli {
    /// Path to a TOML config file; flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Seed for synthetic-data commands and run ids.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Load, filter, and select reviews; writes corpus.jsonl.
    Ingest(IngestArgs),
    /// Embed and cluster a corpus; writes clusters.json.
    Cluster(ClusterArgs),
    /// Run the (threshold, decline) parameter sweep; writes sweep.csv.
    Sweep(SweepArgs),
    /// Generate ISSUE/ADVICE recommendations for a clustering result.
    Recommend(RecommendArgs),
    /// Run ingest, cluster, recommend, and report in one invocation.
    Run(RunArgs),
    /// Time the clustering stage; writes bench.csv.
    Bench(BenchArgs),
    /// Generate a seeded planted-cluster synthetic corpus.
    #[command(hide = true)]
    Synth(SynthArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Input CSV file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub text_column: Option<String>,
    #[arg(long)]
    pub rating_column: Option<String>,
    #[arg(long)]
    pub timestamp_column: Option<String>,
    #[arg(long)]
    pub id_column: Option<String>,
    #[arg(long)]
    pub source_column: Option<String>,
    /// Comma-separated ratings to drop; empty string disables the filter.
    #[arg(long)]
    pub exclude_ratings: Option<String>,
    #[arg(long)]
    pub language: Option<String>,
    #[arg(long)]
    pub confidence_floor: Option<f64>,
    /// Keep only the N most recent reviews.
    #[arg(long)]
    pub latest: Option<usize>,
    /// Skip malformed rows instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Corpus JSON-lines file (default: <out-dir>/corpus.jsonl).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub decline: Option<f64>,
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Use the single-pass baseline (no deletion, no decline).
    #[arg(long)]
    pub baseline: bool,
    /// Embedding backend: local-test or remote.
    #[arg(long)]
    pub backend: Option<String>,
    /// Remote embedding endpoint URL.
    #[arg(long)]
    pub embed_endpoint: Option<String>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Comma-separated thresholds (default: the standard grid).
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Comma-separated decline rates (default: the standard grid).
    #[arg(long)]
    pub declines: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub top_m: usize,
    /// Count cluster size as members only, excluding the representative.
    #[arg(long)]
    pub size_excludes_representative: bool,
}

#[derive(Args)]
pub struct RecommendArgs {
    /// Clustering result file (default: <out-dir>/clusters.json).
    #[arg(long)]
    pub clusters_file: Option<PathBuf>,
    /// Chat-completion endpoint URL.
    #[arg(long)]
    pub chat_endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Print prompts without calling the endpoint.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    #[command(flatten)]
    pub recommend: RecommendArgs,
    /// Skip stages whose output artifact already exists.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated pool sizes.
    #[arg(long, default_value = "100,300")]
    pub sizes: String,
    /// Comma-separated methods: iterative, baseline, word_level.
    #[arg(long, default_value = "baseline,iterative")]
    pub methods: String,
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    pub topics: usize,
    #[arg(long, default_value_t = 8)]
    pub topic_size: usize,
    #[arg(long, default_value_t = 10)]
    pub noise: usize,
}

/// Parse and execute; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    config.output_dir = Some(out_dir.clone());
    fs::create_dir_all(&out_dir).map_err(|e| io_err("creating output directory", e))?;

    match cli.command {
        Command::Ingest(args) => {
            apply_ingest_overrides(&mut config, &args)?;
            echo_config(&config, &out_dir)?;
            cmd_ingest(&config, &out_dir)?;
        }
        Command::Cluster(args) => {
            apply_cluster_overrides(&mut config, &args)?;
            echo_config(&config, &out_dir)?;
            cmd_cluster(&config, &out_dir, &args)?;
        }
        Command::Sweep(args) => {
            echo_config(&config, &out_dir)?;
            cmd_sweep(&config, &out_dir, &args)?;
        }
        Command::Recommend(args) => {
            apply_recommend_overrides(&mut config, &args)?;
            echo_config(&config, &out_dir)?;
            cmd_recommend(&config, &out_dir, &args)?;
        }
        Command::Run(args) => {
            apply_ingest_overrides(&mut config, &args.ingest)?;
            apply_cluster_overrides(&mut config, &args.cluster)?;
            apply_recommend_overrides(&mut config, &args.recommend)?;
            echo_config(&config, &out_dir)?;
            cmd_run(&config, &out_dir, &args)?;
        }
        Command::Bench(args) => {
            echo_config(&config, &out_dir)?;
            cmd_bench(&config, &out_dir, &args)?;
        }
        Command::Synth(args) => {
            let corpus = planted_corpus(
                &SynthParams {
                    num_topics: args.topics,
                    topic_size: args.topic_size,
                    noise_reviews: args.noise,
                },
                config.seed,
            );
            write_corpus(&corpus, &out_dir.join("corpus.jsonl"))?;
            println!("wrote {} synthetic reviews", corpus.len());
        }
    }
    Ok(())
}

fn apply_ingest_overrides(config: &mut PipelineConfig, args: &IngestArgs) -> Result<(), CliError> {
    if let Some(path) = &args.input {
        config.input.path = Some(path.clone());
    }
    if let Some(c) = &args.text_column {
        config.input.text_column = Some(c.clone());
    }
    if let Some(c) = &args.rating_column {
        config.input.rating_column = Some(c.clone());
    }
    if let Some(c) = &args.timestamp_column {
        config.input.timestamp_column = Some(c.clone());
    }
    if let Some(c) = &args.id_column {
        config.input.id_column = Some(c.clone());
    }
    if let Some(c) = &args.source_column {
        config.input.source_column = Some(c.clone());
    }
    if args.lenient {
        config.input.lenient = true;
    }
    if let Some(raw) = &args.exclude_ratings {
        config.filter.exclude_ratings = parse_ratings(raw)?;
    }
    if let Some(language) = &args.language {
        config.filter.language = language.clone();
    }
    if let Some(floor) = args.confidence_floor {
        config.filter.confidence_floor = floor;
    }
    if let Some(latest) = args.latest {
        config.filter.latest = latest;
    }
    Ok(())
}

fn parse_ratings(raw: &str) -> Result<Vec<u8>, CliError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|part| {
            let value: u8 = part
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid rating {part:?}")))?;
            if !(1..=5).contains(&value) {
                return Err(CliError::Config(format!("rating {value} outside 1..5")));
            }
            Ok(value)
        })
        .collect()
}

fn apply_cluster_overrides(config: &mut PipelineConfig, args: &ClusterArgs) -> Result<(), CliError> {
    if let Some(thr) = args.threshold {
        config.cluster.thr0 = thr;
    }
    if let Some(decline) = args.decline {
        config.cluster.thr_decline = decline;
    }
    if let Some(n) = args.clusters {
        config.cluster.num_clusters = n;
    }
    if let Some(backend) = &args.backend {
        config.embedding.kind = match backend.as_str() {
            "local-test" => BackendKind::LocalTest,
            "remote" => BackendKind::Remote,
            other => {
                return Err(CliError::Config(format!(
                    "unknown backend {other:?}; valid: local-test, remote"
                )))
            }
        };
    }
    if let Some(endpoint) = &args.embed_endpoint {
        config.embedding.endpoint = Some(endpoint.clone());
    }
    Ok(())
}

fn apply_recommend_overrides(
    config: &mut PipelineConfig,
    args: &RecommendArgs,
) -> Result<(), CliError> {
    if let Some(endpoint) = &args.chat_endpoint {
        config.chat.endpoint = endpoint.clone();
    }
    if let Some(model) = &args.model {
        config.chat.model_name = model.clone();
    }
    if let Some(template) = &args.template {
        config.prompt.template_path = Some(template.clone());
    }
    Ok(())
}

fn echo_config(config: &PipelineConfig, out_dir: &Path) -> Result<(), CliError> {
    let text = toml::to_string_pretty(config)
        .map_err(|e| CliError::Config(format!("cannot serialize effective config: {e}")))?;
    fs::write(out_dir.join("config.toml"), text)
        .map_err(|e| io_err("writing effective config", e))
}

fn write_corpus(corpus: &ReviewCorpus, path: &Path) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))?;
    let mut writer = std::io::BufWriter::new(file);
    corpus.write_jsonl(&mut writer)?;
    writer.flush().map_err(|e| io_err("flushing corpus", e))
}

fn read_corpus(path: &Path) -> Result<ReviewCorpus, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    Ok(ReviewCorpus::read_jsonl(
        std::io::BufReader::new(file),
        &format!("loaded from {}", path.display()),
    )?)
}

fn column_mapping(config: &PipelineConfig) -> Result<ColumnMapping, CliError> {
    let text = config
        .input
        .text_column
        .clone()
        .ok_or_else(|| CliError::Config("no text column configured".into()))?;
    Ok(ColumnMapping {
        text,
        rating: config.input.rating_column.clone(),
        timestamp: config.input.timestamp_column.clone(),
        id: config.input.id_column.clone(),
        source: config.input.source_column.clone(),
    })
}

/// ingest stage: load, rating filter, language filter, select latest.
pub fn cmd_ingest(config: &PipelineConfig, out_dir: &Path) -> Result<(), CliError> {
    let input = config
        .input
        .path
        .clone()
        .ok_or_else(|| CliError::Config("no input file configured".into()))?;
    if !input.exists() {
        return Err(CliError::Io(format!(
            "input file {} does not exist",
            input.display()
        )));
    }
    let mapping = column_mapping(config)?;
    let corpus = ingest::load_reviews(&input, &mapping, config.input.lenient)?;
    let excluded: HashSet<u8> = config.filter.exclude_ratings.iter().copied().collect();
    let corpus = ingest::filter_by_rating(&corpus, &excluded);
    let corpus = ingest::filter_language(
        &corpus,
        &config.filter.language,
        config.filter.confidence_floor,
        &StopwordDetector::default(),
    );
    let corpus = ingest::select_latest(&corpus, config.filter.latest.max(1));
    write_corpus(&corpus, &out_dir.join("corpus.jsonl"))?;
    println!("{}", corpus.provenance);
    Ok(())
}

fn encode_corpus(
    config: &PipelineConfig,
    corpus: &ReviewCorpus,
) -> Result<Vec<crate::embed::EmbeddingVector>, CliError> {
    let texts = corpus.texts();
    Ok(embed::encode(&texts, &config.embedding)?)
}

/// cluster stage: encode + iterative clustering (or the baseline variant).
pub fn cmd_cluster(
    config: &PipelineConfig,
    out_dir: &Path,
    args: &ClusterArgs,
) -> Result<(), CliError> {
    let corpus_path = args
        .corpus
        .clone()
        .unwrap_or_else(|| out_dir.join("corpus.jsonl"));
    let corpus = read_corpus(&corpus_path)?;
    let vectors = encode_corpus(config, &corpus)?;
    let result = if args.baseline {
        let clusters = baseline_cluster(
            &corpus,
            &vectors,
            config.cluster.thr0,
            config.cluster.num_clusters,
        )?;
        ClusteringResult {
            params: config.cluster,
            pool_size: corpus.len(),
            clusters,
            // the baseline permits overlap; residuals are not tracked
            residual_ids: Vec::new(),
        }
    } else {
        simcluster::process_reviews(&corpus, &vectors, &config.cluster)?
    };
    let json = serde_json::to_string_pretty(&result)
        .map_err(|e| CliError::Io(format!("serializing result: {e}")))?;
    fs::write(out_dir.join("clusters.json"), json + "\n")
        .map_err(|e| io_err("writing clusters.json", e))?;
    println!(
        "{} clusters, {} residual reviews",
        result.clusters.len(),
        result.residual_ids.len()
    );
    Ok(())
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("invalid {what} {part:?}")))
        })
        .collect()
}

/// sweep stage: (threshold, decline) grid → sweep.csv.
pub fn cmd_sweep(config: &PipelineConfig, out_dir: &Path, args: &SweepArgs) -> Result<(), CliError> {
    let corpus_path = args
        .corpus
        .clone()
        .unwrap_or_else(|| out_dir.join("corpus.jsonl"));
    let corpus = read_corpus(&corpus_path)?;
    let vectors = encode_corpus(config, &corpus)?;
    let (default_thresholds, default_declines) = default_sweep_grid();
    let thresholds = match &args.thresholds {
        Some(raw) => parse_f64_list(raw, "threshold")?,
        None => default_thresholds,
    };
    let declines = match &args.declines {
        Some(raw) => parse_f64_list(raw, "decline")?,
        None => default_declines,
    };
    let table = simcluster::sweep(
        &corpus,
        &vectors,
        &thresholds,
        &declines,
        args.top_m,
        config.cluster.num_clusters,
        !args.size_excludes_representative,
    )?;
    fs::write(out_dir.join("sweep.csv"), table.to_csv())
        .map_err(|e| io_err("writing sweep.csv", e))?;
    println!("{} sweep cells written", table.cells.len());
    Ok(())
}

fn load_template(config: &PipelineConfig) -> Result<PromptTemplate, CliError> {
    match &config.prompt.template_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| io_err(&format!("reading template {}", path.display()), e))?;
            Ok(PromptTemplate::from_file_text(&text)?)
        }
        None => Ok(PromptTemplate::default()),
    }
}

fn read_clusters(path: &Path) -> Result<ClusteringResult, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run_id(config: &PipelineConfig) -> String {
    format!("run-{:016x}", config.seed)
}

// Honors SOURCE_DATE_EPOCH for reproducible report headers.
fn created_at() -> String {
    match std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|raw| raw.parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
    {
        Some(t) => t.to_rfc3339(),
        None => chrono::Utc::now().to_rfc3339(),
    }
}

/// recommend stage: one request per cluster, reports in all three formats.
pub fn cmd_recommend(
    config: &PipelineConfig,
    out_dir: &Path,
    args: &RecommendArgs,
) -> Result<(), CliError> {
    let clusters_path = args
        .clusters_file
        .clone()
        .unwrap_or_else(|| out_dir.join("clusters.json"));
    let result = read_clusters(&clusters_path)?;
    let template = load_template(config)?;
    let budget = config.prompt.budget;

    if args.dry_run {
        for cluster in &result.clusters {
            let prompt = recommend::build_prompt(&cluster.representative_text, &template, &budget)?;
            println!("--- prompt for {} ---", cluster.representative_id);
            println!("{prompt}");
        }
        return Ok(());
    }

    if config.chat.endpoint.is_empty() {
        return Err(CliError::Config("chat endpoint is not set".into()));
    }

    // incremental flush so a crash loses at most the in-flight review
    let records_path = out_dir.join("records.jsonl");
    let mut records_file = fs::File::create(&records_path)
        .map_err(|e| io_err("creating records.jsonl", e))?;
    let outcome = recommend::recommend_all(&result, &template, &budget, &config.chat, |record| {
        if let Ok(line) = serde_json::to_string(record) {
            let _ = writeln!(records_file, "{line}");
        }
    })?;

    let by_id: std::collections::HashMap<&str, &recommend::GenerationRecord> = outcome
        .records
        .iter()
        .map(|r| (r.representative_id.as_str(), r))
        .collect();
    let clusters_with_recommendations = result
        .clusters
        .iter()
        .filter_map(|c| {
            by_id
                .get(c.representative_id.as_str())
                .map(|r| (c.clone(), (*r).clone()))
        })
        .collect();
    let report = RunReport {
        run_id: run_id(config),
        created_at: created_at(),
        corpus_provenance: clusters_path.display().to_string(),
        params: result.params,
        clusters_with_recommendations,
        failures: outcome.failures,
    };
    write_reports(&report, out_dir)?;
    println!(
        "{} recommendations, {} failures",
        report.clusters_with_recommendations.len(),
        report.failures.len()
    );
    Ok(())
}

fn write_reports(report: &RunReport, out_dir: &Path) -> Result<(), CliError> {
    for (format, name) in [
        (ReportFormat::Json, "report.json"),
        (ReportFormat::Markdown, "report.md"),
        (ReportFormat::Csv, "report.csv"),
    ] {
        let bytes = emit_run_report(report, format)
            .map_err(|e| CliError::Io(format!("rendering {name}: {e}")))?;
        fs::write(out_dir.join(name), bytes)
            .map_err(|e| io_err(&format!("writing {name}"), e))?;
    }
    Ok(())
}

/// Full pipeline: ingest → cluster → recommend → report.
pub fn cmd_run(config: &PipelineConfig, out_dir: &Path, args: &RunArgs) -> Result<(), CliError> {
    let corpus_path = out_dir.join("corpus.jsonl");
    if !(args.resume && corpus_path.exists()) {
        cmd_ingest(config, out_dir)?;
    }
    let clusters_path = out_dir.join("clusters.json");
    if !(args.resume && clusters_path.exists()) {
        cmd_cluster(config, out_dir, &args.cluster)?;
    }
    let report_path = out_dir.join("report.json");
    if !(args.resume && report_path.exists()) {
        cmd_recommend(config, out_dir, &args.recommend)?;
    }
    Ok(())
}

/// Timing benchmark over seeded synthetic corpora.
pub fn cmd_bench(config: &PipelineConfig, out_dir: &Path, args: &BenchArgs) -> Result<(), CliError> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("invalid pool size {part:?}")))
        })
        .collect::<Result<_, _>>()?;
    let methods: Vec<BenchMethod> = args
        .methods
        .split(',')
        .map(|part| {
            BenchMethod::parse(part.trim()).ok_or_else(|| {
                CliError::Config(format!(
                    "invalid method {part:?}; valid: iterative, baseline, word_level"
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    if args.repeat == 0 {
        return Err(CliError::Config("--repeat must be >= 1".into()));
    }
    let rows = report::bench(&sizes, &methods, config.seed, args.repeat);
    fs::write(out_dir.join("bench.csv"), bench_csv(&rows))
        .map_err(|e| io_err("writing bench.csv", e))?;
    for row in &rows {
        println!("{},{},{:.6}", row.method.name(), row.pool_size, row.seconds);
    }
    Ok(())
}
