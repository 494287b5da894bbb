//! Turn a corpus of raw customer reviews into a ranked set of recurring-issue
//! clusters and, for each cluster's representative review, an actionable
//! ISSUE/ADVICE recommendation obtained from a chat-completion endpoint.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! - [`ingest`]: load, validate, filter, and select review records.
//! - [`embed`]: sentence embeddings via a remote HTTP backend or a
//!   deterministic local test encoder.
//! - [`simcluster`]: cosine similarity matrix plus iterative
//!   threshold-decline clustering, the single-pass baseline, and a
//!   parameter-sweep tool.
//! - [`recommend`]: prompt construction, chat-completion calls, and
//!   structured ISSUE/ADVICE parsing.
//!
//! [`report`] assembles run artifacts (JSON/Markdown/CSV reports, annotation
//! sheets, coherence scoring, timing benchmarks) and [`synth`] generates
//! seeded planted-cluster corpora for testing and benchmarks. See the
//! `examples/` directory for runnable walkthroughs of each capability.

pub mod cli;
pub mod embed;
pub mod ingest;
pub mod recommend;
pub mod report;
pub mod simcluster;
pub mod synth;

pub use embed::{EmbeddingBackendConfig, EmbeddingVector};
pub use ingest::{Review, ReviewCorpus};
pub use recommend::{GenerationRecord, PromptBudget, PromptTemplate, Recommendation};
pub use simcluster::{Cluster, ClusterParams, ClusteringResult, SimilarityMatrix};
