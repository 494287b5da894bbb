//! Seeded planted-cluster corpus generator.
//!
//! Builds a synthetic review pool with a known number of topic groups plus
//! noise reviews. Reviews inside a topic share most of their vocabulary, so
//! the local test encoder places them close together; noise reviews draw from
//! a broad unrelated vocabulary. Fully determined by the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{Review, ReviewCorpus};

/// Shape of a planted-cluster corpus.
#[derive(Debug, Clone, Copy)]
pub struct SynthParams {
    pub num_topics: usize,
    /// Reviews per topic.
    pub topic_size: usize,
    pub noise_reviews: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            num_topics: 5,
            topic_size: 8,
            noise_reviews: 10,
        }
    }
}

const TOPIC_BANKS: &[&[&str]] = &[
    &["appointment", "waiting", "hours", "late", "schedule", "delay", "reception", "queue"],
    &["billing", "quote", "insurance", "charges", "invoice", "overpriced", "refund", "estimate"],
    &["staff", "rude", "receptionist", "unfriendly", "dismissive", "attitude", "manners", "respect"],
    &["phone", "call", "callback", "voicemail", "unanswered", "ringing", "message", "contact"],
    &["pain", "extraction", "filling", "anesthetic", "procedure", "rough", "gentle", "numbing"],
    &["clean", "hygiene", "equipment", "sterile", "dirty", "gloves", "chair", "room"],
    &["parking", "location", "access", "entrance", "signage", "elevator", "directions", "lot"],
    &["cancellation", "reschedule", "notice", "confirmation", "reminder", "booking", "online", "system"],
];

const NOISE_BANK: &[&str] = &[
    "weather", "lunch", "traffic", "music", "magazine", "television", "coffee", "plants",
    "window", "painting", "carpet", "lighting", "neighborhood", "bus", "bicycle", "umbrella",
    "jacket", "shoes", "holiday", "birthday", "cousin", "garden", "recipe", "football",
];

const FILLERS: &[&str] = &["the", "was", "and", "really", "very", "so", "again", "today"];

/// Generate a deterministic planted-cluster corpus.
///
/// Each topic review repeats the topic's base phrase and adds a couple of
/// words sampled from the topic bank, yielding high intra-topic cosine
/// similarity under the hashed bag-of-words encoder.
pub fn planted_corpus(params: &SynthParams, seed: u64) -> ReviewCorpus {
    assert!(params.num_topics >= 1 && params.num_topics <= TOPIC_BANKS.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reviews = Vec::new();

    for topic in 0..params.num_topics {
        let bank = TOPIC_BANKS[topic];
        // the shared core keeps intra-topic similarity high
        let core: Vec<&str> = bank[..5].to_vec();
        for r in 0..params.topic_size {
            let mut words: Vec<&str> = core.clone();
            let extra = rng.gen_range(1..=2);
            for _ in 0..extra {
                words.push(bank[5..].choose(&mut rng).unwrap());
            }
            words.push(FILLERS.choose(&mut rng).unwrap());
            reviews.push(Review {
                id: format!("t{topic}-r{r}"),
                text: words.join(" "),
                rating: Some(rng.gen_range(1..=3)),
                timestamp: None,
                source: Some("synthetic".into()),
            });
        }
    }

    for r in 0..params.noise_reviews {
        let count = rng.gen_range(4..=7);
        let mut words: Vec<&str> = Vec::with_capacity(count);
        for _ in 0..count {
            words.push(NOISE_BANK.choose(&mut rng).unwrap());
        }
        reviews.push(Review {
            id: format!("noise-{r}"),
            text: words.join(" "),
            rating: Some(rng.gen_range(1..=3)),
            timestamp: None,
            source: Some("synthetic".into()),
        });
    }

    // interleave so topics are not contiguous in pool order
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..reviews.len()).collect();
        idx.shuffle(&mut rng);
        idx
    };
    let reviews: Vec<Review> = order.into_iter().map(|i| reviews[i].clone()).collect();

    ReviewCorpus {
        provenance: format!(
            "synthetic planted corpus: {} topics x {} + {} noise, seed {seed}",
            params.num_topics, params.topic_size, params.noise_reviews
        ),
        reviews,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::encode_local;

    #[test]
    fn generation_is_seed_deterministic() {
        let params = SynthParams::default();
        let a = planted_corpus(&params, 42);
        let b = planted_corpus(&params, 42);
        assert_eq!(a.reviews, b.reviews);
        let c = planted_corpus(&params, 43);
        assert_ne!(a.reviews, c.reviews);
    }

    #[test]
    fn corpus_has_expected_size() {
        let params = SynthParams {
            num_topics: 3,
            topic_size: 6,
            noise_reviews: 4,
        };
        let corpus = planted_corpus(&params, 7);
        assert_eq!(corpus.len(), 3 * 6 + 4);
    }

    #[test]
    fn intra_topic_similarity_exceeds_cross_topic() {
        let corpus = planted_corpus(&SynthParams::default(), 42);
        let vectors: Vec<_> = corpus
            .reviews
            .iter()
            .map(|r| encode_local(&r.text, 384))
            .collect();
        let cosine = |a: usize, b: usize| -> f64 {
            vectors[a]
                .values
                .iter()
                .zip(&vectors[b].values)
                .map(|(x, y)| x * y)
                .sum()
        };
        let topic = |i: usize| corpus.reviews[i].id.split('-').next().unwrap().to_string();
        let mut intra = Vec::new();
        let mut cross = Vec::new();
        for i in 0..corpus.len() {
            for j in (i + 1)..corpus.len() {
                if topic(i).starts_with('t') && topic(i) == topic(j) {
                    intra.push(cosine(i, j));
                } else if topic(i) != topic(j) {
                    cross.push(cosine(i, j));
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&intra) > 0.7, "intra-topic mean {}", mean(&intra));
        assert!(mean(&intra) > mean(&cross) + 0.3);
    }
}
