//! Parse labeled ISSUE/ADVICE pairs out of model responses.
//!
//! Run with: cargo run --example parse_responses

use reviewmine::recommend::parse_recommendations;

fn main() {
    let samples = [
        // plain labels
        "ISSUE: The quoted price did not match the invoice.\n\
         ADVICE: Put every estimate in writing before treatment.",
        // markdown decoration and bullets are stripped
        "- **ISSUE:** Phone calls went unanswered for days.\n\
         - **ADVICE:** Return every voicemail within one business day.",
        // free prose without labels yields nothing
        "The customer is clearly unhappy about the waiting room.",
    ];

    for (i, text) in samples.iter().enumerate() {
        let recommendations = parse_recommendations(text);
        println!("sample {i}: {} pair(s)", recommendations.len());
        for rec in &recommendations {
            println!("  issue:  {}", rec.issue);
            println!("  advice: {}", rec.advice);
        }
    }
}
