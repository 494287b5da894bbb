//! Prompt construction, chat-completion calls, and structured ISSUE/ADVICE
//! parsing.
//!
//! Representative reviews are sent one at a time; a per-review failure is
//! recorded and the run continues. With temperature 0 and a deterministic
//! endpoint the whole stage is byte-reproducible.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simcluster::ClusteringResult;

/// Token budget governing prompt truncation and response length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptBudget {
    pub max_input_tokens: usize,
    pub max_new_tokens: usize,
    /// Characters-per-token heuristic used to estimate token counts.
    pub chars_per_token: f64,
}

impl Default for PromptBudget {
    fn default() -> Self {
        PromptBudget {
            max_input_tokens: 2048,
            max_new_tokens: 512,
            chars_per_token: 4.0,
        }
    }
}

impl PromptBudget {
    fn char_limit(&self) -> usize {
        (self.max_input_tokens as f64 * self.chars_per_token).floor() as usize
    }
}

/// Marker appended where text was cut to fit the budget.
pub const TRUNCATION_MARKER: &str = "…";

/// The master prompt skeleton. The rendered prompt is preamble, instructions,
/// optional one-shot example, output format spec, then the review text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub system_preamble: String,
    pub instructions: String,
    /// `(review, expected output)` shown to the model as a worked example.
    #[serde(default)]
    pub one_shot_example: Option<(String, String)>,
    pub output_format_spec: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            system_preamble: "You are a business consultant analyzing customer feedback for a \
                              local business."
                .to_string(),
            instructions: "Read the customer review below and identify each concrete problem it \
                           describes. For every problem, give one specific, directly \
                           implementable action the business can take. Avoid generic or overly \
                           broad recommendations; name the exact process, role, or policy to \
                           change."
                .to_string(),
            one_shot_example: Some((
                "I booked online for 9am but the front desk had no record of it, and when I \
                 asked about the bill nobody could explain the extra charges."
                    .to_string(),
                "ISSUE: Online bookings are not reaching the front desk.\nADVICE: Sync the \
                 online booking system with the front-desk calendar and have a staff member \
                 confirm each online booking by message within one hour.\n\nISSUE: Customers \
                 cannot get billing charges explained.\nADVICE: Train front-desk staff to walk \
                 through each line item on request and add an itemized breakdown to every \
                 invoice."
                    .to_string(),
            )),
            output_format_spec: "Respond only with one or more pairs of lines in exactly this \
                                 format:\nISSUE: <the problem>\nADVICE: <the concrete action>"
                .to_string(),
        }
    }
}

impl PromptTemplate {
    /// Load a template from a text file with a single `{{review}}` slot and
    /// an optional `{{example}}` slot.
    pub fn from_file_text(text: &str) -> Result<Self, RecommendError> {
        let slots = text.matches("{{review}}").count();
        if slots != 1 {
            return Err(RecommendError::Template(format!(
                "template must contain exactly one {{{{review}}}} slot, found {slots}"
            )));
        }
        let default = PromptTemplate::default();
        let body = if text.contains("{{example}}") {
            let example = default
                .one_shot_example
                .as_ref()
                .map(|(review, output)| format!("Example review:\n{review}\n\nExample output:\n{output}"))
                .unwrap_or_default();
            text.replace("{{example}}", &example)
        } else {
            text.to_string()
        };
        // a file template is treated as a pre-rendered body: the whole text
        // around the slot is the instruction block
        let (before, after) = body.split_once("{{review}}").expect("slot checked above");
        Ok(PromptTemplate {
            system_preamble: before.trim_end().to_string(),
            instructions: String::new(),
            one_shot_example: None,
            output_format_spec: after.trim_start().to_string(),
        })
    }
}

/// One parsed ISSUE/ADVICE pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub issue: String,
    pub advice: String,
}

impl Recommendation {
    /// The canonical text rendering, reparseable by
    /// [`parse_recommendations`].
    pub fn render(&self) -> String {
        format!("ISSUE: {}\nADVICE: {}", self.issue, self.advice)
    }
}

/// Everything recorded about one representative review's trip to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub representative_id: String,
    pub prompt: String,
    pub raw_response: String,
    pub recommendations: Vec<Recommendation>,
    /// Wall-clock latency in milliseconds. Volatile across runs; excluded
    /// from the deterministic report serialization.
    #[serde(skip)]
    pub latency_ms: u64,
    pub model_name: String,
    /// Transport retries before success.
    #[serde(skip)]
    pub retries: u32,
}

/// Chat-completion endpoint configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChatClientConfig {
    pub endpoint: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub max_retries: u32,
}

impl Default for ChatClientConfig {
    fn default() -> Self {
        ChatClientConfig {
            endpoint: String::new(),
            model_name: "llama-3-8b-instruct".to_string(),
            api_key_env: None,
            temperature: 0.0,
            timeout_secs: 120,
            max_retries: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum RecommendError {
    #[error("template error: {0}")]
    Template(String),
    #[error("prompt is empty after truncation")]
    EmptyPrompt,
    #[error("chat client config error: {0}")]
    Config(String),
    #[error("transport failure after {retries} retries: {reason}")]
    Transport { retries: u32, reason: String },
    #[error("malformed chat response: {0}")]
    BadResponse(String),
    #[error("all {0} generation requests failed")]
    AllFailed(usize),
    #[error("clustering result has no clusters")]
    NoClusters,
}

fn char_count(s: &str) -> usize {
    s.chars().count()
}

fn cut_at_whitespace(text: &str, max_chars: usize) -> String {
    if char_count(text) <= max_chars {
        return text.to_string();
    }
    let prefix: String = text.chars().take(max_chars).collect();
    let cut = match prefix.rfind(char::is_whitespace) {
        Some(pos) if pos > 0 => &prefix[..pos],
        _ => prefix.as_str(),
    };
    format!("{}{}", cut.trim_end(), TRUNCATION_MARKER)
}

/// Cut `text` to the character budget, breaking at the last whitespace before
/// the limit and appending the truncation marker. Under-budget text passes
/// through unchanged.
pub fn truncate_to_budget(text: &str, budget: &PromptBudget) -> String {
    let estimated_tokens =
        (char_count(text) as f64 / budget.chars_per_token).ceil() as usize;
    if estimated_tokens <= budget.max_input_tokens {
        return text.to_string();
    }
    cut_at_whitespace(text, budget.char_limit())
}

/// Render the master prompt for one review and fit it to the budget.
///
/// The review body shrinks first; the template sections are only cut when
/// they alone exceed the budget.
pub fn build_prompt(
    review_text: &str,
    template: &PromptTemplate,
    budget: &PromptBudget,
) -> Result<String, RecommendError> {
    let mut sections: Vec<String> = Vec::new();
    if !template.system_preamble.is_empty() {
        sections.push(template.system_preamble.clone());
    }
    if !template.instructions.is_empty() {
        sections.push(template.instructions.clone());
    }
    if let Some((example_review, example_output)) = &template.one_shot_example {
        sections.push(format!(
            "Example review:\n{example_review}\n\nExample output:\n{example_output}"
        ));
    }
    if !template.output_format_spec.is_empty() {
        sections.push(template.output_format_spec.clone());
    }
    let fixed = sections.join("\n\n");
    let separator = if fixed.is_empty() { "" } else { "\n\nCustomer review:\n" };

    let limit = budget.char_limit();
    let fixed_chars = char_count(&fixed) + char_count(separator);
    let rendered = if fixed_chars < limit {
        let review = cut_at_whitespace(review_text, limit - fixed_chars);
        format!("{fixed}{separator}{review}")
    } else {
        // template alone blows the budget; truncate the whole rendering
        cut_at_whitespace(
            &format!("{fixed}{separator}{review_text}"),
            limit,
        )
    };
    if rendered.trim().is_empty() {
        return Err(RecommendError::EmptyPrompt);
    }
    Ok(rendered)
}

/// Scan model output for case-insensitive `ISSUE:` / `ADVICE:` label pairs.
///
/// Markdown decoration (bold and underline markers, leading list bullets) is
/// stripped first. Pairs with an empty side are dropped; order is preserved.
/// Unparseable text yields an empty list.
pub fn parse_recommendations(raw: &str) -> Vec<Recommendation> {
    let cleaned = strip_markdown(raw);

    let mut recommendations = Vec::new();
    let mut cursor = 0usize;
    while let Some(label) = find_label(&cleaned, cursor, "ISSUE:") {
        let issue_start = label + "ISSUE:".len();
        let Some(advice_label) = find_label(&cleaned, issue_start, "ADVICE:") else {
            break;
        };
        let advice_start = advice_label + "ADVICE:".len();
        let advice_end =
            find_label(&cleaned, advice_start, "ISSUE:").unwrap_or(cleaned.len());

        let issue = cleaned[issue_start..advice_label].trim().to_string();
        let advice = cleaned[advice_start..advice_end].trim().to_string();
        if !issue.is_empty() && !advice.is_empty() {
            recommendations.push(Recommendation { issue, advice });
        }
        cursor = advice_end;
    }
    recommendations
}

// Byte offset of the next ASCII case-insensitive occurrence of `label` at or
// after `from`.
fn find_label(haystack: &str, from: usize, label: &str) -> Option<usize> {
    let bytes = haystack.as_bytes();
    let needle = label.as_bytes();
    if bytes.len() < needle.len() {
        return None;
    }
    (from..=bytes.len() - needle.len())
        .find(|&i| bytes[i..i + needle.len()].eq_ignore_ascii_case(needle))
}

fn strip_markdown(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let trimmed = line.trim_start();
        let without_bullet = trimmed
            .strip_prefix("- ")
            .or_else(|| trimmed.strip_prefix("* "))
            .or_else(|| trimmed.strip_prefix("• "))
            .unwrap_or(trimmed);
        let leading = &line[..line.len() - trimmed.len()];
        out.push_str(leading);
        out.push_str(&without_bullet.replace("**", "").replace("__", ""));
        out.push('\n');
    }
    out.pop();
    out
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    max_tokens: usize,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

/// Outcome of one chat-completion call.
pub struct GenerationOutcome {
    pub text: String,
    pub latency_ms: u64,
    pub retries: u32,
}

/// Issue one chat-completion request for `prompt`.
///
/// The response's assistant text is returned verbatim except that a leading
/// prompt echo, if present, is stripped. Transport failures are retried with
/// exponential backoff up to the configured count.
pub fn generate(
    config: &ChatClientConfig,
    prompt: &str,
    budget: &PromptBudget,
) -> Result<GenerationOutcome, RecommendError> {
    if prompt.is_empty() {
        return Err(RecommendError::EmptyPrompt);
    }
    if config.endpoint.is_empty() {
        return Err(RecommendError::Config("chat endpoint is not set".into()));
    }
    let api_key = match &config.api_key_env {
        Some(var) => Some(std::env::var(var).map_err(|_| {
            RecommendError::Config(format!("API key environment variable {var} is not set"))
        })?),
        None => None,
    };
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .build()
        .map_err(|e| RecommendError::Config(e.to_string()))?;

    let body = ChatRequest {
        model: &config.model_name,
        messages: vec![ChatMessage {
            role: "user",
            content: prompt,
        }],
        max_tokens: budget.max_new_tokens,
        temperature: config.temperature,
    };

    let start = Instant::now();
    let mut last_error = String::new();
    for attempt in 0..=config.max_retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(
                50u64.saturating_mul(1 << attempt.min(6)),
            ));
        }
        let mut request = client.post(&config.endpoint).json(&body);
        if let Some(key) = &api_key {
            request = request.bearer_auth(key);
        }
        match request.send() {
            Ok(response) if response.status().is_success() => {
                let parsed: ChatResponse = response
                    .json()
                    .map_err(|e| RecommendError::BadResponse(e.to_string()))?;
                let content = parsed
                    .choices
                    .first()
                    .map(|c| c.message.content.clone())
                    .ok_or_else(|| RecommendError::BadResponse("no choices".into()))?;
                let text = match content.strip_prefix(prompt) {
                    Some(rest) => rest.trim_start().to_string(),
                    None => content,
                };
                return Ok(GenerationOutcome {
                    text,
                    latency_ms: start.elapsed().as_millis() as u64,
                    retries: attempt,
                });
            }
            Ok(response) => {
                last_error = format!("status {}", response.status());
            }
            Err(e) => {
                last_error = e.to_string();
            }
        }
    }
    Err(RecommendError::Transport {
        retries: config.max_retries,
        reason: last_error,
    })
}

/// The records and failures produced by a recommend stage.
#[derive(Debug)]
pub struct RecommendOutcome {
    pub records: Vec<GenerationRecord>,
    /// `(representative_id, error)` for clusters whose request failed.
    pub failures: Vec<(String, String)>,
}

/// Send each cluster's representative review to the model, one request in
/// flight at a time, in cluster order.
///
/// Per-review failures are recorded and the run continues; only a run where
/// every request fails is an error. `on_record` is invoked after each
/// successful record so callers can flush incrementally.
pub fn recommend_all(
    result: &ClusteringResult,
    template: &PromptTemplate,
    budget: &PromptBudget,
    config: &ChatClientConfig,
    mut on_record: impl FnMut(&GenerationRecord),
) -> Result<RecommendOutcome, RecommendError> {
    if result.clusters.is_empty() {
        return Err(RecommendError::NoClusters);
    }
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for cluster in &result.clusters {
        let prompt = match build_prompt(&cluster.representative_text, template, budget) {
            Ok(p) => p,
            Err(e) => {
                failures.push((cluster.representative_id.clone(), e.to_string()));
                continue;
            }
        };
        match generate(config, &prompt, budget) {
            Ok(outcome) => {
                let record = GenerationRecord {
                    representative_id: cluster.representative_id.clone(),
                    recommendations: parse_recommendations(&outcome.text),
                    prompt,
                    raw_response: outcome.text,
                    latency_ms: outcome.latency_ms,
                    model_name: config.model_name.clone(),
                    retries: outcome.retries,
                };
                on_record(&record);
                records.push(record);
            }
            // configuration problems affect every request; bail out instead
            // of recording one failure per cluster
            Err(e @ RecommendError::Config(_)) => return Err(e),
            Err(e) => {
                failures.push((cluster.representative_id.clone(), e.to_string()));
            }
        }
    }
    if records.is_empty() {
        return Err(RecommendError::AllFailed(result.clusters.len()));
    }
    Ok(RecommendOutcome { records, failures })
}
