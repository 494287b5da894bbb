//! Fixed-dimension sentence embeddings via a pluggable backend.
//!
//! Two backends are provided: a remote HTTP embeddings API (the de-facto
//! `{"model", "input"}` / `{"data": [{"index", "embedding"}]}` wire shape)
//! and a deterministic local test encoder that hashes lowercase word tokens
//! into buckets and l2-normalizes the counts. The local backend keeps the
//! pipeline free of ML-runtime dependencies while preserving the input
//! contract of the clustering stage.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A fixed-dimension embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Which backend `encode` talks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Remote,
    LocalTest,
}

/// Backend selection plus transport parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingBackendConfig {
    pub kind: BackendKind,
    /// Base URL of the embeddings endpoint (remote only).
    #[serde(default)]
    pub endpoint: Option<String>,
    pub model_name: String,
    pub batch_size: usize,
    /// When set, every returned vector must have this dimension.
    #[serde(default)]
    pub expected_dim: Option<usize>,
    /// Dimension of the local test encoder.
    pub local_dim: usize,
    /// Name of the environment variable holding the API key, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Max remote batches in flight at once.
    pub parallelism: usize,
}

impl Default for EmbeddingBackendConfig {
    fn default() -> Self {
        EmbeddingBackendConfig {
            kind: BackendKind::LocalTest,
            endpoint: None,
            model_name: "all-MiniLM-L6-v2".to_string(),
            batch_size: 32,
            expected_dim: None,
            local_dim: 384,
            api_key_env: None,
            timeout_secs: 60,
            max_retries: 3,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("empty text list")]
    EmptyInput,
    #[error("invalid backend config: {0}")]
    Config(String),
    #[error("transport failure after {retries} retries: {reason}")]
    Transport { retries: u32, reason: String },
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed embeddings response: {0}")]
    BadResponse(String),
    #[error("zero-norm vector")]
    ZeroNorm,
}

/// Scale a vector to unit Euclidean norm.
pub fn l2_normalize(v: &EmbeddingVector) -> Result<EmbeddingVector, EmbedError> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(EmbedError::ZeroNorm);
    }
    Ok(EmbeddingVector {
        values: v.values.iter().map(|x| x / norm).collect(),
    })
}

// FNV-1a; the std hasher is randomly keyed per process and would break
// run-to-run determinism.
fn fnv1a(token: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in token.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Deterministic hashed bag-of-words encoder.
///
/// Each lowercase word token is hashed to one of `dim` buckets, counts are
/// accumulated, and the result is l2-normalized. Zero-norm texts (e.g.
/// all-punctuation) map to the basis vector e_0 so the similarity matrix
/// stays total.
pub fn encode_local(text: &str, dim: usize) -> EmbeddingVector {
    assert!(dim >= 1, "dim must be positive");
    let mut values = vec![0.0f64; dim];
    for token in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let bucket = (fnv1a(&token.to_lowercase()) % dim as u64) as usize;
        values[bucket] += 1.0;
    }
    let v = EmbeddingVector { values };
    match l2_normalize(&v) {
        Ok(unit) => unit,
        Err(_) => {
            let mut values = vec![0.0f64; dim];
            values[0] = 1.0;
            EmbeddingVector { values }
        }
    }
}

#[derive(Serialize)]
struct EmbeddingsRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    index: usize,
    embedding: Vec<f64>,
}

/// Encode a list of texts, preserving input order.
///
/// The remote backend issues batched requests of at most `batch_size` texts,
/// up to `parallelism` batches in flight, and reassembles results by index so
/// output order is deterministic regardless of completion order.
pub fn encode(
    texts: &[String],
    config: &EmbeddingBackendConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    if texts.is_empty() {
        return Err(EmbedError::EmptyInput);
    }
    if config.batch_size == 0 {
        return Err(EmbedError::Config("batch_size must be >= 1".into()));
    }
    let vectors = match config.kind {
        BackendKind::LocalTest => texts
            .iter()
            .map(|t| encode_local(t, config.local_dim))
            .collect::<Vec<_>>(),
        BackendKind::Remote => encode_remote(texts, config)?,
    };

    let dim = vectors[0].dim();
    if let Some(expected) = config.expected_dim {
        if dim != expected {
            return Err(EmbedError::DimensionMismatch {
                expected,
                got: dim,
            });
        }
    }
    for v in &vectors {
        if v.dim() != dim {
            return Err(EmbedError::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
    }
    Ok(vectors)
}

fn encode_remote(
    texts: &[String],
    config: &EmbeddingBackendConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let endpoint = config
        .endpoint
        .as_deref()
        .filter(|e| !e.is_empty())
        .ok_or_else(|| EmbedError::Config("remote backend requires an endpoint".into()))?;
    let api_key = match &config.api_key_env {
        Some(var) => Some(std::env::var(var).map_err(|_| {
            EmbedError::Config(format!("API key environment variable {var} is not set"))
        })?),
        None => None,
    };
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .build()
        .map_err(|e| EmbedError::Config(e.to_string()))?;

    let batches: Vec<&[String]> = texts.chunks(config.batch_size).collect();
    let parallelism = config.parallelism.max(1);
    let mut results: Vec<Option<Vec<EmbeddingVector>>> = vec![None; batches.len()];

    for (group_start, group) in batches.chunks(parallelism).enumerate().map(|(g, group)| {
        (g * parallelism, group)
    }) {
        let outputs: Vec<Result<Vec<EmbeddingVector>, EmbedError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = group
                .iter()
                .map(|batch| {
                    let client = &client;
                    let api_key = api_key.as_deref();
                    scope.spawn(move || fetch_batch(client, endpoint, api_key, config, batch))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (offset, out) in outputs.into_iter().enumerate() {
            results[group_start + offset] = Some(out?);
        }
    }

    let mut vectors = Vec::with_capacity(texts.len());
    for batch in results {
        vectors.extend(batch.expect("all batches completed"));
    }
    Ok(vectors)
}

fn fetch_batch(
    client: &reqwest::blocking::Client,
    endpoint: &str,
    api_key: Option<&str>,
    config: &EmbeddingBackendConfig,
    batch: &[String],
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let body = EmbeddingsRequest {
        model: &config.model_name,
        input: batch,
    };
    let mut last_error = String::new();
    for attempt in 0..=config.max_retries {
        if attempt > 0 {
            std::thread::sleep(backoff(attempt));
        }
        let mut request = client.post(endpoint).json(&body);
        if let Some(key) = api_key {
            request = request.bearer_auth(key);
        }
        match request.send() {
            Ok(response) if response.status().is_success() => {
                let parsed: EmbeddingsResponse = response
                    .json()
                    .map_err(|e| EmbedError::BadResponse(e.to_string()))?;
                if parsed.data.len() != batch.len() {
                    return Err(EmbedError::BadResponse(format!(
                        "expected {} embeddings, got {}",
                        batch.len(),
                        parsed.data.len()
                    )));
                }
                let mut items = parsed.data;
                items.sort_by_key(|item| item.index);
                return Ok(items
                    .into_iter()
                    .map(|item| EmbeddingVector {
                        values: item.embedding,
                    })
                    .collect());
            }
            Ok(response) => {
                last_error = format!("status {}", response.status());
            }
            Err(e) => {
                last_error = e.to_string();
            }
        }
    }
    Err(EmbedError::Transport {
        retries: config.max_retries,
        reason: last_error,
    })
}

fn backoff(attempt: u32) -> Duration {
    Duration::from_millis(50u64.saturating_mul(1 << attempt.min(6)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
        let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
        dot / (a.norm() * b.norm())
    }

    #[test]
    fn l2_normalize_345_triangle() {
        let v = EmbeddingVector {
            values: vec![3.0, 4.0],
        };
        let unit = l2_normalize(&v).unwrap();
        assert!((unit.values[0] - 0.6).abs() < 1e-12);
        assert!((unit.values[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn l2_normalize_unit_vector_is_identity() {
        let v = EmbeddingVector {
            values: vec![0.0, 1.0, 0.0],
        };
        let unit = l2_normalize(&v).unwrap();
        for (a, b) in unit.values.iter().zip(&v.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn l2_normalize_zero_vector_errors() {
        let v = EmbeddingVector {
            values: vec![0.0, 0.0],
        };
        assert!(matches!(l2_normalize(&v), Err(EmbedError::ZeroNorm)));
    }

    #[test]
    fn local_backend_is_deterministic() {
        let config = EmbeddingBackendConfig::default();
        let texts = vec!["a".to_string(), "a".to_string()];
        let vectors = encode(&texts, &config).unwrap();
        assert_eq!(vectors[0], vectors[1]);
        let again = encode(&texts, &config).unwrap();
        assert_eq!(vectors, again);
    }

    #[test]
    fn local_backend_shape_contract() {
        let config = EmbeddingBackendConfig {
            local_dim: 64,
            ..Default::default()
        };
        let texts: Vec<String> = ["one", "two words", "three word text"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let vectors = encode(&texts, &config).unwrap();
        assert_eq!(vectors.len(), 3);
        assert!(vectors.iter().all(|v| v.dim() == 64));
        assert!(vectors.iter().all(|v| (v.norm() - 1.0).abs() < 1e-6));
    }

    #[test]
    fn shared_tokens_raise_similarity() {
        // one pair shares half its tokens, the other shares none
        let triples = [
            ("late appointment bad wait", "late appointment rude staff", "pricing quote insurance bill"),
            ("dirty waiting room chairs", "dirty waiting room smell", "friendly dentist gentle care"),
            ("phone rings nobody answers", "phone rings no callback", "parking lot was full today"),
        ];
        for (a, b, c) in triples {
            let va = encode_local(a, 384);
            let vb = encode_local(b, 384);
            let vc = encode_local(c, 384);
            assert!(cosine(&va, &vb) >= cosine(&va, &vc), "{a} / {b} / {c}");
        }
    }

    #[test]
    fn zero_norm_text_maps_to_basis_vector() {
        let v = encode_local("!!! ...", 16);
        assert_eq!(v.values[0], 1.0);
        assert!(v.values[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn empty_input_is_an_error() {
        let config = EmbeddingBackendConfig::default();
        assert!(matches!(encode(&[], &config), Err(EmbedError::EmptyInput)));
    }

    #[test]
    fn expected_dim_mismatch_is_an_error() {
        let config = EmbeddingBackendConfig {
            local_dim: 64,
            expected_dim: Some(384),
            ..Default::default()
        };
        let texts = vec!["hello".to_string()];
        assert!(matches!(
            encode(&texts, &config),
            Err(EmbedError::DimensionMismatch { .. })
        ));
    }
}
