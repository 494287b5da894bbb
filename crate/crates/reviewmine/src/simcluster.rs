//! Similarity matrix construction and greedy iterative cluster extraction.
//!
//! The iterative variant repeatedly selects the review with the largest
//! above-threshold similar set, emits it as a cluster representative, deletes
//! the whole cluster from the pool and matrix, lowers the threshold by a
//! fixed decline, and repeats for a configured number of cycles. A
//! single-pass baseline (no deletion, no decline) and a parameter-sweep tool
//! are provided for comparison.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbeddingVector;
use crate::ingest::ReviewCorpus;

/// Square pairwise cosine-similarity matrix over a review pool.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
    row_ids: Vec<String>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    /// Build a matrix directly from entries; rejects asymmetric input.
    pub fn from_entries(entries: Vec<Vec<f64>>, row_ids: Vec<String>) -> Result<Self, ClusterError> {
        let n = entries.len();
        if row_ids.len() != n {
            return Err(ClusterError::Shape(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                n
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &entries {
            if row.len() != n {
                return Err(ClusterError::Shape("matrix is not square".into()));
            }
            flat.extend_from_slice(row);
        }
        let m = SimilarityMatrix {
            n,
            entries: flat,
            row_ids,
        };
        for i in 0..n {
            for j in (i + 1)..n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(ClusterError::Shape(format!(
                        "asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(m)
    }
}

/// Parameters of the iterative clustering loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// Starting similarity threshold.
    pub thr0: f64,
    /// Amount subtracted from the threshold after each iteration.
    pub thr_decline: f64,
    /// Number of iterations (clusters to extract).
    pub num_clusters: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            thr0: 0.70,
            thr_decline: 0.01,
            num_clusters: 10,
        }
    }
}

impl ClusterParams {
    /// The threshold used at iteration `k`.
    pub fn threshold_at(&self, k: usize) -> f64 {
        self.thr0 - (k as f64) * self.thr_decline
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if !(self.thr0 > 0.0 && self.thr0 < 1.0) {
            return Err(ClusterError::InvalidParams(format!(
                "thr0 {} not in (0,1)",
                self.thr0
            )));
        }
        if self.thr_decline < 0.0 {
            return Err(ClusterError::InvalidParams(format!(
                "thr_decline {} is negative",
                self.thr_decline
            )));
        }
        if self.num_clusters == 0 {
            return Err(ClusterError::InvalidParams("num_clusters is zero".into()));
        }
        let last = self.threshold_at(self.num_clusters - 1);
        if last <= 0.0 {
            return Err(ClusterError::InvalidParams(format!(
                "final-iteration threshold {last} is not positive"
            )));
        }
        Ok(())
    }
}

/// One extracted cluster: a representative review plus its similar set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub representative_id: String,
    pub representative_text: String,
    pub member_ids: Vec<String>,
    pub weight: usize,
    pub threshold_used: f64,
    pub iteration: usize,
}

impl Cluster {
    /// Members plus the representative.
    pub fn size(&self) -> usize {
        self.weight + 1
    }
}

/// Output of a clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub params: ClusterParams,
    pub pool_size: usize,
    pub clusters: Vec<Cluster>,
    pub residual_ids: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("invalid cluster params: {0}")]
    InvalidParams(String),
    #[error("matrix shape error: {0}")]
    Shape(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero-norm vector at index {0}")]
    ZeroNorm(usize),
    #[error("non-finite value in vector {0}")]
    NonFinite(usize),
    #[error("pool has {pool} reviews but {vectors} vectors were supplied")]
    PoolVectorMismatch { pool: usize, vectors: usize },
}

/// Pairwise cosine similarity over the given vectors.
///
/// One triangle is computed and mirrored so the matrix is symmetric exactly;
/// the diagonal is set to 1 exactly.
pub fn cosine_similarity_matrix(
    vectors: &[EmbeddingVector],
    row_ids: &[String],
) -> Result<SimilarityMatrix, ClusterError> {
    let n = vectors.len();
    if n < 2 {
        return Err(ClusterError::Shape("need at least 2 vectors".into()));
    }
    if row_ids.len() != n {
        return Err(ClusterError::Shape(format!(
            "{} row ids for {n} vectors",
            row_ids.len()
        )));
    }
    let dim = vectors[0].dim();
    let mut norms = Vec::with_capacity(n);
    for (i, v) in vectors.iter().enumerate() {
        if v.dim() != dim {
            return Err(ClusterError::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        if v.values.iter().any(|x| !x.is_finite()) {
            return Err(ClusterError::NonFinite(i));
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(ClusterError::ZeroNorm(i));
        }
        norms.push(norm);
    }

    let mut entries = vec![0.0f64; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let dot: f64 = vectors[i]
                .values
                .iter()
                .zip(&vectors[j].values)
                .map(|(a, b)| a * b)
                .sum();
            let sim = dot / (norms[i] * norms[j]);
            entries[i * n + j] = sim;
            entries[j * n + i] = sim;
        }
    }
    Ok(SimilarityMatrix {
        n,
        entries,
        row_ids: row_ids.to_vec(),
    })
}

/// Clamp off-diagonal entries to `[0,1]` and force the diagonal to exactly 1.
pub fn normalize_matrix(m: &SimilarityMatrix) -> SimilarityMatrix {
    let n = m.n;
    let mut entries = m.entries.clone();
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            if i == j {
                entries[idx] = 1.0;
            } else {
                entries[idx] = entries[idx].clamp(0.0, 1.0);
            }
        }
    }
    SimilarityMatrix {
        n,
        entries,
        row_ids: m.row_ids.clone(),
    }
}

/// Indices `j != row` whose similarity to `row` strictly exceeds `thr`.
pub fn find_similar(m: &SimilarityMatrix, row: usize, thr: f64) -> BTreeSet<usize> {
    (0..m.n)
        .filter(|&j| j != row && m.get(row, j) > thr)
        .collect()
}

// Similar-set counts restricted to the active rows, with active-set aware
// membership. Returns (best_row, members) where best_row maximizes the count,
// ties broken by smallest original index.
fn select_top(m: &SimilarityMatrix, active: &[bool], thr: f64) -> Option<(usize, BTreeSet<usize>)> {
    let mut best: Option<(usize, BTreeSet<usize>)> = None;
    for i in 0..m.n {
        if !active[i] {
            continue;
        }
        let members: BTreeSet<usize> = (0..m.n)
            .filter(|&j| j != i && active[j] && m.get(i, j) > thr)
            .collect();
        match &best {
            Some((_, current)) if members.len() <= current.len() => {}
            _ => best = Some((i, members)),
        }
    }
    best
}

/// Run the iterative threshold-decline clustering loop.
///
/// For iteration `k` with threshold `thr0 - k * thr_decline` over the current
/// pool: compute every row's similar set, select the row with the largest set
/// (ties to the smallest original index), emit it as a cluster, delete the
/// representative and its members from the pool and matrix, and continue.
/// Stops early when the pool empties.
pub fn process_reviews(
    pool: &ReviewCorpus,
    vectors: &[EmbeddingVector],
    params: &ClusterParams,
) -> Result<ClusteringResult, ClusterError> {
    params.validate()?;
    if pool.len() != vectors.len() {
        return Err(ClusterError::PoolVectorMismatch {
            pool: pool.len(),
            vectors: vectors.len(),
        });
    }
    if pool.is_empty() {
        return Ok(ClusteringResult {
            params: *params,
            pool_size: 0,
            clusters: Vec::new(),
            residual_ids: Vec::new(),
        });
    }

    let ids: Vec<String> = pool.reviews.iter().map(|r| r.id.clone()).collect();
    let matrix = if pool.len() == 1 {
        // a single review forms a trivially empty-neighborhood matrix
        SimilarityMatrix {
            n: 1,
            entries: vec![1.0],
            row_ids: ids.clone(),
        }
    } else {
        normalize_matrix(&cosine_similarity_matrix(vectors, &ids)?)
    };

    // deletion is logical: a mask of active rows
    let mut active = vec![true; matrix.n()];
    let mut clusters = Vec::new();
    for k in 0..params.num_clusters {
        let thr = params.threshold_at(k);
        let Some((rep, members)) = select_top(&matrix, &active, thr) else {
            break;
        };
        active[rep] = false;
        for &j in &members {
            active[j] = false;
        }
        clusters.push(Cluster {
            representative_id: ids[rep].clone(),
            representative_text: pool.reviews[rep].text.clone(),
            member_ids: members.iter().map(|&j| ids[j].clone()).collect(),
            weight: members.len(),
            threshold_used: thr,
            iteration: k,
        });
        if active.iter().all(|&a| !a) {
            break;
        }
    }

    let residual_ids = active
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| ids[i].clone())
        .collect();
    Ok(ClusteringResult {
        params: *params,
        pool_size: pool.len(),
        clusters,
        residual_ids,
    })
}

/// Single-pass baseline: no deletion, no threshold decline.
///
/// Every row's similar set is computed at `thr`; the top `k` rows by count
/// (ties to the smallest index) become clusters. Clusters may overlap.
pub fn baseline_cluster(
    pool: &ReviewCorpus,
    vectors: &[EmbeddingVector],
    thr: f64,
    k: usize,
) -> Result<Vec<Cluster>, ClusterError> {
    if pool.len() != vectors.len() {
        return Err(ClusterError::PoolVectorMismatch {
            pool: pool.len(),
            vectors: vectors.len(),
        });
    }
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let ids: Vec<String> = pool.reviews.iter().map(|r| r.id.clone()).collect();
    if pool.len() == 1 {
        return Ok(vec![Cluster {
            representative_id: ids[0].clone(),
            representative_text: pool.reviews[0].text.clone(),
            member_ids: Vec::new(),
            weight: 0,
            threshold_used: thr,
            iteration: 0,
        }]);
    }
    let matrix = normalize_matrix(&cosine_similarity_matrix(vectors, &ids)?);

    let mut ranked: Vec<(usize, BTreeSet<usize>)> = (0..matrix.n())
        .map(|i| (i, find_similar(&matrix, i, thr)))
        .collect();
    // descending by count, ties by smallest index (sort is stable)
    ranked.sort_by(|(_, a), (_, b)| b.len().cmp(&a.len()));

    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(i, members)| Cluster {
            representative_id: ids[i].clone(),
            representative_text: pool.reviews[i].text.clone(),
            member_ids: members.iter().map(|&j| ids[j].clone()).collect(),
            weight: members.len(),
            threshold_used: thr,
            iteration: 0,
        })
        .collect())
}

/// Default threshold for the word-level baseline configuration.
pub const WORD_LEVEL_DEFAULT_THRESHOLD: f64 = 0.68;

/// The word-level baseline configuration: identical mechanics to
/// [`baseline_cluster`] at a default threshold of 0.68. Callers supply
/// whatever token-level vectors they have; no word-level encoder is bundled.
pub fn word_level_baseline(
    pool: &ReviewCorpus,
    token_vectors: &[EmbeddingVector],
    thr: f64,
    k: usize,
) -> Result<Vec<Cluster>, ClusterError> {
    baseline_cluster(pool, token_vectors, thr, k)
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub threshold: f64,
    pub decline_rate: f64,
    /// Average size of the first `top_m` clusters, or an error message for
    /// parameter combinations violating the params invariant.
    pub avg_cluster_size: Result<f64, String>,
}

/// Grid of (threshold, decline rate) → average top-m cluster size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
    pub top_m: usize,
    pub size_includes_representative: bool,
}

/// The default sweep grid: thresholds 0.68..0.72 × declines 0..0.02.
pub fn default_sweep_grid() -> (Vec<f64>, Vec<f64>) {
    (
        vec![0.68, 0.69, 0.70, 0.71, 0.72],
        vec![0.0, 0.005, 0.01, 0.015, 0.02],
    )
}

/// Run the clustering loop over a (threshold, decline) grid and record the
/// average size of the first `top_m` clusters per cell, in row-major order
/// (thresholds outer, declines inner).
pub fn sweep(
    pool: &ReviewCorpus,
    vectors: &[EmbeddingVector],
    thresholds: &[f64],
    declines: &[f64],
    top_m: usize,
    num_clusters: usize,
    size_includes_representative: bool,
) -> Result<SweepTable, ClusterError> {
    if thresholds.is_empty() || declines.is_empty() {
        return Err(ClusterError::InvalidParams(
            "thresholds and declines must be non-empty".into(),
        ));
    }
    let mut cells = Vec::with_capacity(thresholds.len() * declines.len());
    for &thr0 in thresholds {
        for &decline in declines {
            let params = ClusterParams {
                thr0,
                thr_decline: decline,
                num_clusters,
            };
            let avg_cluster_size = match process_reviews(pool, vectors, &params) {
                Ok(result) => {
                    let sizes: Vec<usize> = result
                        .clusters
                        .iter()
                        .take(top_m)
                        .map(|c| {
                            if size_includes_representative {
                                c.size()
                            } else {
                                c.weight
                            }
                        })
                        .collect();
                    if sizes.is_empty() {
                        Ok(0.0)
                    } else {
                        Ok(sizes.iter().sum::<usize>() as f64 / sizes.len() as f64)
                    }
                }
                Err(e) => Err(e.to_string()),
            };
            cells.push(SweepCell {
                threshold: thr0,
                decline_rate: decline,
                avg_cluster_size,
            });
        }
    }
    Ok(SweepTable {
        cells,
        top_m,
        size_includes_representative,
    })
}

impl SweepTable {
    /// Render as CSV with the `threshold,decline_rate,avg_cluster_size_top3`
    /// header. Sizes are rounded to the nearest integer for display; error
    /// cells render as `error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,decline_rate,avg_cluster_size_top3\n");
        for cell in &self.cells {
            let value = match &cell.avg_cluster_size {
                Ok(v) => format!("{}", v.round() as i64),
                Err(_) => "error".to_string(),
            };
            out.push_str(&format!(
                "{},{},{}\n",
                cell.threshold, cell.decline_rate, value
            ));
        }
        out
    }
}
