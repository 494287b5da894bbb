//! Load, validate, filter, and select review records to form the clustering pool.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One customer review record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// An ordered, stable collection of reviews plus a description of how it was
/// produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewCorpus {
    pub reviews: Vec<Review>,
    pub provenance: String,
}

impl ReviewCorpus {
    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn texts(&self) -> Vec<String> {
        self.reviews.iter().map(|r| r.text.clone()).collect()
    }

    /// Serialize as JSON lines, one review object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), IngestError> {
        for review in &self.reviews {
            serde_json::to_writer(&mut w, review).map_err(|e| IngestError::Serde(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Read a corpus back from JSON lines.
    pub fn read_jsonl<R: BufRead>(r: R, provenance: &str) -> Result<Self, IngestError> {
        let mut reviews = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let review: Review = serde_json::from_str(&line)
                .map_err(|e| IngestError::Serde(format!("line {}: {e}", i + 1)))?;
            reviews.push(review);
        }
        Ok(ReviewCorpus {
            reviews,
            provenance: provenance.to_string(),
        })
    }
}

/// Maps CSV header names onto review fields. Only `text` is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub text: String,
    #[serde(default)]
    pub rating: Option<String>,
    #[serde(default)]
    pub timestamp: Option<String>,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub source: Option<String>,
}

impl ColumnMapping {
    pub fn text_only(column: &str) -> Self {
        ColumnMapping {
            text: column.to_string(),
            rating: None,
            timestamp: None,
            id: None,
            source: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing mapped column {column:?} in CSV header")]
    MissingColumn { column: String },
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("serialization error: {0}")]
    Serde(String),
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn {
            column: name.to_string(),
        })
}

/// Load reviews from a CSV file, one `Review` per data row in file order.
///
/// Missing optional fields become absent, not defaults. When no id column is
/// mapped, ids are synthesized from the row ordinal. A malformed row is fatal
/// unless `lenient` is set, in which case it is skipped and reported in the
/// corpus provenance.
pub fn load_reviews(
    path: &Path,
    mapping: &ColumnMapping,
    lenient: bool,
) -> Result<ReviewCorpus, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let text_idx = column_index(&headers, &mapping.text)?;
    let rating_idx = mapping
        .rating
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;
    let timestamp_idx = mapping
        .timestamp
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;
    let id_idx = mapping
        .id
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;
    let source_idx = mapping
        .source
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;

    let mut reviews = Vec::new();
    let mut skipped = 0usize;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1; // 1-based data-row number
        match parse_row(
            &record?,
            row,
            text_idx,
            rating_idx,
            timestamp_idx,
            id_idx,
            source_idx,
        ) {
            Ok(review) => reviews.push(review),
            Err(e) if lenient => {
                eprintln!("skipping {e}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }

    let mut provenance = format!("loaded {} reviews from {}", reviews.len(), path.display());
    if skipped > 0 {
        provenance.push_str(&format!(" ({skipped} malformed rows skipped)"));
    }
    Ok(ReviewCorpus {
        reviews,
        provenance,
    })
}

fn parse_row(
    record: &csv::StringRecord,
    row: usize,
    text_idx: usize,
    rating_idx: Option<usize>,
    timestamp_idx: Option<usize>,
    id_idx: Option<usize>,
    source_idx: Option<usize>,
) -> Result<Review, IngestError> {
    let field = |idx: usize| record.get(idx).unwrap_or("").trim().to_string();

    let text = field(text_idx);
    if text.is_empty() {
        return Err(IngestError::MalformedRow {
            row,
            reason: "empty review text".into(),
        });
    }

    let rating = match rating_idx {
        Some(idx) => {
            let raw = field(idx);
            if raw.is_empty() {
                None
            } else {
                let value: u8 = raw.parse().map_err(|_| IngestError::MalformedRow {
                    row,
                    reason: format!("rating {raw:?} is not an integer"),
                })?;
                if !(1..=5).contains(&value) {
                    return Err(IngestError::MalformedRow {
                        row,
                        reason: format!("rating {value} outside 1..5"),
                    });
                }
                Some(value)
            }
        }
        None => None,
    };

    let timestamp = match timestamp_idx {
        Some(idx) => {
            let raw = field(idx);
            if raw.is_empty() {
                None
            } else {
                let parsed = DateTime::parse_from_rfc3339(&raw).map_err(|e| {
                    IngestError::MalformedRow {
                        row,
                        reason: format!("timestamp {raw:?}: {e}"),
                    }
                })?;
                Some(parsed.with_timezone(&Utc))
            }
        }
        None => None,
    };

    let id = match id_idx {
        Some(idx) => field(idx),
        None => format!("{}", row - 1),
    };
    let source = source_idx.map(&field).filter(|s| !s.is_empty());

    Ok(Review {
        id,
        text,
        rating,
        timestamp,
        source,
    })
}

/// Keep reviews whose rating is absent or not in `excluded`. Order preserved.
pub fn filter_by_rating(corpus: &ReviewCorpus, excluded: &HashSet<u8>) -> ReviewCorpus {
    let reviews: Vec<Review> = corpus
        .reviews
        .iter()
        .filter(|r| r.rating.map_or(true, |v| !excluded.contains(&v)))
        .cloned()
        .collect();
    let provenance = format!(
        "{}; rating filter excluded {:?}: {} -> {}",
        corpus.provenance,
        sorted(excluded),
        corpus.len(),
        reviews.len()
    );
    ReviewCorpus {
        reviews,
        provenance,
    }
}

fn sorted(set: &HashSet<u8>) -> Vec<u8> {
    let mut v: Vec<u8> = set.iter().copied().collect();
    v.sort_unstable();
    v
}

/// Maps a text to a `(language code, confidence in [0,1])` pair.
pub trait LanguageDetector {
    fn detect(&self, text: &str) -> (String, f64);
}

/// Stopword-frequency language profile detector.
///
/// Counts stopword hits per language profile; the language with the most hits
/// wins and confidence is that language's share of all hits. A text with no
/// stopword hits in any profile detects as `"und"` with confidence 0.
pub struct StopwordDetector {
    profiles: Vec<(&'static str, HashSet<&'static str>)>,
}

impl Default for StopwordDetector {
    fn default() -> Self {
        let profiles = vec![
            (
                "en",
                [
                    "the", "a", "an", "is", "was", "were", "are", "and", "or", "of", "to", "in",
                    "it", "that", "this", "for", "with", "not", "they", "my", "i", "you", "we",
                    "at", "on", "be", "have", "had", "very", "but", "so", "me", "her", "his",
                    "she", "he",
                ]
                .into_iter()
                .collect(),
            ),
            (
                "es",
                [
                    "el", "la", "los", "las", "un", "una", "es", "fue", "son", "y", "o", "de",
                    "del", "en", "que", "por", "para", "con", "no", "muy", "pero", "mi", "su",
                    "se", "al", "como", "más", "este", "esta",
                ]
                .into_iter()
                .collect(),
            ),
            (
                "fr",
                [
                    "le", "la", "les", "un", "une", "est", "était", "sont", "et", "ou", "de",
                    "du", "des", "en", "que", "qui", "pour", "avec", "pas", "très", "mais", "je",
                    "ne", "ce", "cette", "il", "elle", "nous",
                ]
                .into_iter()
                .collect(),
            ),
            (
                "de",
                [
                    "der", "die", "das", "ein", "eine", "ist", "war", "sind", "und", "oder",
                    "von", "zu", "im", "mit", "nicht", "sehr", "aber", "ich", "wir", "sie", "es",
                    "für", "auf", "dem", "den",
                ]
                .into_iter()
                .collect(),
            ),
        ];
        StopwordDetector { profiles }
    }
}

impl LanguageDetector for StopwordDetector {
    fn detect(&self, text: &str) -> (String, f64) {
        let tokens: Vec<String> = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(|t| t.to_lowercase())
            .collect();
        let mut best: Option<(&str, usize)> = None;
        let mut total = 0usize;
        for (code, words) in &self.profiles {
            let hits = tokens.iter().filter(|t| words.contains(t.as_str())).count();
            total += hits;
            // ties resolved by profile order
            if hits > 0 && best.map_or(true, |(_, b)| hits > b) {
                best = Some((code, hits));
            }
        }
        match best {
            Some((code, hits)) => (code.to_string(), hits as f64 / total as f64),
            None => ("und".to_string(), 0.0),
        }
    }
}

/// Keep reviews detected as `keep_language` with confidence at or above
/// `confidence_floor`. Order preserved.
pub fn filter_language(
    corpus: &ReviewCorpus,
    keep_language: &str,
    confidence_floor: f64,
    detector: &dyn LanguageDetector,
) -> ReviewCorpus {
    let reviews: Vec<Review> = corpus
        .reviews
        .iter()
        .filter(|r| {
            let (lang, conf) = detector.detect(&r.text);
            lang == keep_language && conf >= confidence_floor
        })
        .cloned()
        .collect();
    let provenance = format!(
        "{}; language filter keep={keep_language}: {} -> {}",
        corpus.provenance,
        corpus.len(),
        reviews.len()
    );
    ReviewCorpus {
        reviews,
        provenance,
    }
}

/// Select the `n` most recent reviews.
///
/// When every review carries a timestamp the corpus is sorted newest-first
/// (ties broken by original order); otherwise the first `n` in corpus order
/// are taken. A corpus of `n` or fewer reviews is returned whole.
pub fn select_latest(corpus: &ReviewCorpus, n: usize) -> ReviewCorpus {
    assert!(n >= 1, "n must be positive");
    let all_timestamped = !corpus.is_empty() && corpus.reviews.iter().all(|r| r.timestamp.is_some());
    let reviews: Vec<Review> = if all_timestamped {
        let mut indexed: Vec<(usize, &Review)> = corpus.reviews.iter().enumerate().collect();
        // stable sort keeps original order on equal timestamps
        indexed.sort_by(|(_, a), (_, b)| b.timestamp.cmp(&a.timestamp));
        indexed.into_iter().take(n).map(|(_, r)| r.clone()).collect()
    } else {
        corpus.reviews.iter().take(n).cloned().collect()
    };
    let provenance = format!(
        "{}; selected latest {}: {} -> {}",
        corpus.provenance,
        n,
        corpus.len(),
        reviews.len()
    );
    ReviewCorpus {
        reviews,
        provenance,
    }
}

fn email_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}").unwrap())
}

fn phone_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // 7+ digits with optional separators between them
    RE.get_or_init(|| Regex::new(r"\+?\d(?:[\s\-.()]{0,2}\d){6,}").unwrap())
}

/// Replace email addresses with `[EMAIL]` and phone-number-like digit runs
/// (7+ digits, optional separators) with `[PHONE]`. Everything else is left
/// byte-identical. Idempotent.
pub fn redact_pii(text: &str) -> String {
    let redacted = email_re().replace_all(text, "[EMAIL]");
    phone_re().replace_all(&redacted, "[PHONE]").into_owned()
}

fn keyword_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(implement|review|structure|train)\b").unwrap())
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b\d+(?:\.\d+)?\b").unwrap())
}

/// Strip the fine-tuning stop keywords (whole-word, case-insensitive) and all
/// numeric tokens, then collapse runs of whitespace. Used when preparing
/// training-text exports.
pub fn clean_training_text(text: &str) -> String {
    let cleaned = keyword_re().replace_all(text, "");
    let cleaned = number_re().replace_all(&cleaned, "");
    let mut out = String::with_capacity(cleaned.len());
    let mut last_space = true;
    for c in cleaned.chars() {
        if c.is_whitespace() {
            if !last_space {
                out.push(' ');
            }
            last_space = true;
        } else {
            out.push(c);
            last_space = false;
        }
    }
    out.trim().to_string()
}
