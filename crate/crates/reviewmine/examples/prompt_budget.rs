//! Show how prompts are assembled and truncated to the token budget.
//!
//! Run with: cargo run --example prompt_budget

use reviewmine::recommend::{build_prompt, PromptBudget, PromptTemplate, TRUNCATION_MARKER};

fn main() {
    let template = PromptTemplate::default();

    let short = "the receptionist was dismissive and the callback never came";
    let prompt = build_prompt(short, &template, &PromptBudget::default()).unwrap();
    println!("--- short review passes through unchanged ---\n{prompt}\n");

    // a review far over the budget gets cut at a whitespace boundary
    let long = "the appointment ran late and the billing was confusing ".repeat(500);
    let tight = PromptBudget {
        max_input_tokens: 128,
        max_new_tokens: 512,
        chars_per_token: 4.0,
    };
    let prompt = build_prompt(&long, &template, &tight).unwrap();
    println!("--- long review, 128-token budget ---");
    println!("{} chars, truncated: {}", prompt.chars().count(), prompt.contains(TRUNCATION_MARKER));
}
