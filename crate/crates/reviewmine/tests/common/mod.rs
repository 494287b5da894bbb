//! Shared test helpers: a programmable HTTP stub server and an independent
//! brute-force clustering oracle.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use reviewmine::embed::EmbeddingVector;
use reviewmine::ingest::ReviewCorpus;
use reviewmine::simcluster::{Cluster, ClusterParams, ClusteringResult};

/// What the stub returns for one HTTP request.
pub struct StubResponse {
    pub status: u16,
    pub body: String,
    pub delay: Duration,
}

impl StubResponse {
    pub fn ok(body: String) -> Self {
        StubResponse {
            status: 200,
            body,
            delay: Duration::ZERO,
        }
    }

    pub fn error(status: u16) -> Self {
        StubResponse {
            status,
            body: "{}".to_string(),
            delay: Duration::ZERO,
        }
    }
}

type Behavior = dyn Fn(&str, usize) -> StubResponse + Send + Sync + 'static;

/// Minimal single-purpose HTTP server for exercising the embed and chat
/// clients without a network.
pub struct StubServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<String>>>,
    counter: Arc<AtomicUsize>,
}

impl StubServer {
    /// `behavior(body, request_index)` decides each response.
    pub fn start(behavior: impl Fn(&str, usize) -> StubResponse + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub server");
        let addr = listener.local_addr().unwrap();
        let requests: Arc<Mutex<Vec<String>>> = Arc::new(Mutex::new(Vec::new()));
        let counter = Arc::new(AtomicUsize::new(0));
        let behavior: Arc<Behavior> = Arc::new(behavior);
        {
            let requests = Arc::clone(&requests);
            let counter = Arc::clone(&counter);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    let Ok(stream) = stream else { break };
                    let requests = Arc::clone(&requests);
                    let counter = Arc::clone(&counter);
                    let behavior = Arc::clone(&behavior);
                    std::thread::spawn(move || {
                        let _ = handle_connection(stream, &requests, &counter, behavior.as_ref());
                    });
                }
            });
        }
        StubServer {
            url: format!("http://{addr}/"),
            requests,
            counter,
        }
    }

    pub fn request_count(&self) -> usize {
        self.counter.load(Ordering::SeqCst)
    }
}

fn handle_connection(
    mut stream: TcpStream,
    requests: &Mutex<Vec<String>>,
    counter: &AtomicUsize,
    behavior: &Behavior,
) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            break;
        }
        if let Some(value) = trimmed
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(|v| v.trim().to_string())
        {
            content_length = value.parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let body = String::from_utf8_lossy(&body).into_owned();

    let index = counter.fetch_add(1, Ordering::SeqCst);
    requests.lock().unwrap().push(body.clone());
    let response = behavior(&body, index);
    if !response.delay.is_zero() {
        std::thread::sleep(response.delay);
    }
    let reason = if response.status == 200 { "OK" } else { "Error" };
    write!(
        stream,
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        response.status,
        reason,
        response.body.len(),
        response.body
    )?;
    stream.flush()
}

/// A deterministic chat stub body: one ISSUE/ADVICE pair derived from the
/// prompt content, wrapped in the chat-completions response shape.
pub fn deterministic_chat_response(request_body: &str, _index: usize) -> StubResponse {
    let parsed: serde_json::Value = serde_json::from_str(request_body).unwrap();
    let prompt = parsed["messages"][0]["content"].as_str().unwrap_or("");
    let tag = fnv1a(prompt);
    let content = format!("ISSUE: problem {tag:08x}\nADVICE: action {tag:08x}");
    StubResponse::ok(chat_body(&content))
}

/// Wrap assistant text in the chat-completions response JSON.
pub fn chat_body(content: &str) -> String {
    serde_json::json!({"choices": [{"message": {"content": content}}]}).to_string()
}

/// Wrap vectors in the embeddings response JSON, index-tagged.
pub fn embeddings_body(vectors: &[Vec<f64>]) -> String {
    let data: Vec<serde_json::Value> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| serde_json::json!({"index": i, "embedding": v}))
        .collect();
    serde_json::json!({"data": data}).to_string()
}

fn fnv1a(s: &str) -> u32 {
    let mut hash: u32 = 0x811c9dc5;
    for b in s.as_bytes() {
        hash ^= u32::from(*b);
        hash = hash.wrapping_mul(0x01000193);
    }
    hash
}

// ---------------------------------------------------------------------------
// Brute-force clustering oracle: physical deletion, from-scratch similar-set
// recomputation each iteration, no incremental state. Kept independent of the
// library's matrix implementation.
// ---------------------------------------------------------------------------

struct OracleRow {
    original_index: usize,
    id: String,
    text: String,
}

fn oracle_similarity(vectors: &[EmbeddingVector]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let norms: Vec<f64> = vectors
        .iter()
        .map(|v| v.values.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut matrix = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        matrix[i][i] = 1.0;
        for j in (i + 1)..n {
            let dot: f64 = vectors[i]
                .values
                .iter()
                .zip(&vectors[j].values)
                .map(|(a, b)| a * b)
                .sum();
            let sim = (dot / (norms[i] * norms[j])).clamp(0.0, 1.0);
            matrix[i][j] = sim;
            matrix[j][i] = sim;
        }
    }
    matrix
}

/// Reference implementation of the iterative clustering loop.
pub fn oracle_process_reviews(
    pool: &ReviewCorpus,
    vectors: &[EmbeddingVector],
    params: &ClusterParams,
) -> ClusteringResult {
    let mut rows: Vec<OracleRow> = pool
        .reviews
        .iter()
        .enumerate()
        .map(|(i, r)| OracleRow {
            original_index: i,
            id: r.id.clone(),
            text: r.text.clone(),
        })
        .collect();
    let mut matrix = if vectors.len() >= 2 {
        oracle_similarity(vectors)
    } else {
        vec![vec![1.0]; vectors.len()]
    };

    let mut clusters = Vec::new();
    for k in 0..params.num_clusters {
        if rows.is_empty() {
            break;
        }
        let thr = params.thr0 - (k as f64) * params.thr_decline;

        // from scratch: similar sets for every remaining row
        let similar: Vec<Vec<usize>> = (0..rows.len())
            .map(|i| {
                (0..rows.len())
                    .filter(|&j| j != i && matrix[i][j] > thr)
                    .collect()
            })
            .collect();
        let mut best = 0usize;
        for i in 1..rows.len() {
            // strictly larger count wins; ties keep the earlier row, which
            // has the smaller original index
            if similar[i].len() > similar[best].len() {
                best = i;
            }
        }

        let members = &similar[best];
        clusters.push(Cluster {
            representative_id: rows[best].id.clone(),
            representative_text: rows[best].text.clone(),
            member_ids: members.iter().map(|&j| rows[j].id.clone()).collect(),
            weight: members.len(),
            threshold_used: thr,
            iteration: k,
        });

        // physical deletion of representative and members
        let mut doomed: Vec<usize> = members.clone();
        doomed.push(best);
        doomed.sort_unstable();
        for &idx in doomed.iter().rev() {
            rows.remove(idx);
            matrix.remove(idx);
            for row in &mut matrix {
                row.remove(idx);
            }
        }
    }

    let mut residual: Vec<(usize, String)> = rows
        .into_iter()
        .map(|r| (r.original_index, r.id))
        .collect();
    residual.sort_unstable_by_key(|(i, _)| *i);
    ClusteringResult {
        params: *params,
        pool_size: pool.len(),
        clusters,
        residual_ids: residual.into_iter().map(|(_, id)| id).collect(),
    }
}
