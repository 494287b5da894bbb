//! Walk a small CSV through the ingest filters: ratings, language, PII.
//!
//! Run with: cargo run --example ingest_filters

use std::collections::HashSet;

use reviewmine::ingest::{
    filter_by_rating, filter_language, load_reviews, redact_pii, ColumnMapping, StopwordDetector,
};

fn main() {
    let csv = "\
text,stars
\"the billing was wrong and nobody called me back at 555 123 4567\",1
\"great experience, the staff was lovely\",5
\"la atención fue muy mala y el personal era grosero\",2
\"email me at pat@example.com about the refund that was promised\",2
";
    let dir = std::env::temp_dir().join("reviewmine-ingest-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("reviews.csv");
    std::fs::write(&path, csv).unwrap();

    let mapping = ColumnMapping {
        text: "text".into(),
        rating: Some("stars".into()),
        timestamp: None,
        id: None,
        source: None,
    };
    let corpus = load_reviews(&path, &mapping, false).unwrap();
    println!("loaded {} reviews", corpus.len());

    // drop the satisfied reviews, keep the complaints
    let excluded: HashSet<u8> = [4, 5].into();
    let corpus = filter_by_rating(&corpus, &excluded);
    println!("after rating filter: {}", corpus.len());

    let corpus = filter_language(&corpus, "en", 0.5, &StopwordDetector::default());
    println!("after language filter: {}", corpus.len());

    for review in &corpus.reviews {
        println!("  {}", redact_pii(&review.text));
    }
}
