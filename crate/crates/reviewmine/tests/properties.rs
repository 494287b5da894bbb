//! Property tests for the filter, embedding, clustering, and parsing
//! invariants.

mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use reviewmine::embed::EmbeddingVector;
use reviewmine::ingest::{
    filter_by_rating, redact_pii, select_latest, Review, ReviewCorpus,
};
use reviewmine::recommend::{
    build_prompt, parse_recommendations, PromptBudget, PromptTemplate, Recommendation,
    TRUNCATION_MARKER,
};
use reviewmine::simcluster::{
    cosine_similarity_matrix, find_similar, normalize_matrix, process_reviews, ClusterParams,
};

fn corpus_strategy() -> impl Strategy<Value = ReviewCorpus> {
    prop::collection::vec(prop::option::of(1u8..=5), 0..40).prop_map(|ratings| ReviewCorpus {
        reviews: ratings
            .into_iter()
            .enumerate()
            .map(|(i, rating)| Review {
                id: i.to_string(),
                text: format!("review {i}"),
                rating,
                timestamp: None,
                source: None,
            })
            .collect(),
        provenance: "prop".into(),
    })
}

fn vectors_strategy(max_len: usize) -> impl Strategy<Value = Vec<EmbeddingVector>> {
    (2usize..max_len, 2usize..6).prop_flat_map(|(n, dim)| {
        prop::collection::vec(
            prop::collection::vec(0.01f64..1.0, dim..=dim),
            n..=n,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .map(|values| EmbeddingVector { values })
                .collect()
        })
    })
}

fn word_strategy() -> impl Strategy<Value = String> {
    "[a-z]{1,8}"
}

fn phrase_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(word_strategy(), 1..8).prop_map(|words| words.join(" "))
}

proptest! {
    #[test]
    fn rating_filter_returns_ordered_subsequence(corpus in corpus_strategy(), excluded in prop::collection::hash_set(1u8..=5, 0..5)) {
        let filtered = filter_by_rating(&corpus, &excluded);
        // subsequence: every kept review appears in the input, in order
        let mut input = corpus.reviews.iter();
        for kept in &filtered.reviews {
            prop_assert!(input.any(|r| r == kept));
        }
        // no review with an excluded rating survives
        for r in &filtered.reviews {
            if let Some(v) = r.rating {
                prop_assert!(!excluded.contains(&v));
            }
        }
    }

    #[test]
    fn select_latest_size_contract(corpus in corpus_strategy(), n in 1usize..50) {
        let picked = select_latest(&corpus, n);
        prop_assert_eq!(picked.len(), n.min(corpus.len()));
    }

    #[test]
    fn redact_pii_is_idempotent(text in "[ -~]{0,200}") {
        let once = redact_pii(&text);
        prop_assert_eq!(redact_pii(&once), once);
    }

    #[test]
    fn similarity_matrix_is_symmetric_with_unit_diagonal(vectors in vectors_strategy(20)) {
        let ids: Vec<String> = (0..vectors.len()).map(|i| i.to_string()).collect();
        let m = normalize_matrix(&cosine_similarity_matrix(&vectors, &ids).unwrap());
        for i in 0..m.n() {
            prop_assert_eq!(m.get(i, i), 1.0);
            for j in 0..m.n() {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert!((0.0..=1.0).contains(&m.get(i, j)));
            }
        }
    }

    #[test]
    fn find_similar_is_monotone_in_threshold(
        vectors in vectors_strategy(15),
        thr_a in 0.0f64..1.0,
        thr_b in 0.0f64..1.0,
    ) {
        let (low, high) = if thr_a <= thr_b { (thr_a, thr_b) } else { (thr_b, thr_a) };
        let ids: Vec<String> = (0..vectors.len()).map(|i| i.to_string()).collect();
        let m = normalize_matrix(&cosine_similarity_matrix(&vectors, &ids).unwrap());
        for row in 0..m.n() {
            let tight = find_similar(&m, row, high);
            let loose = find_similar(&m, row, low);
            prop_assert!(tight.is_subset(&loose));
        }
    }

    #[test]
    fn iterative_clustering_partitions_the_pool(vectors in vectors_strategy(25)) {
        let corpus = ReviewCorpus {
            reviews: (0..vectors.len())
                .map(|i| Review {
                    id: format!("r{i}"),
                    text: format!("text {i}"),
                    rating: None,
                    timestamp: None,
                    source: None,
                })
                .collect(),
            provenance: "prop".into(),
        };
        let result = process_reviews(&corpus, &vectors, &ClusterParams::default()).unwrap();
        let mut seen: HashSet<&String> = HashSet::new();
        for cluster in &result.clusters {
            prop_assert!(seen.insert(&cluster.representative_id));
            prop_assert_eq!(cluster.weight, cluster.member_ids.len());
            for member in &cluster.member_ids {
                prop_assert!(seen.insert(member));
            }
        }
        for id in &result.residual_ids {
            prop_assert!(seen.insert(id));
        }
        let all: HashSet<&String> = corpus.reviews.iter().map(|r| &r.id).collect();
        prop_assert_eq!(seen, all);
    }

    #[test]
    fn oracle_agrees_on_random_pools(vectors in vectors_strategy(20)) {
        let corpus = ReviewCorpus {
            reviews: (0..vectors.len())
                .map(|i| Review {
                    id: format!("r{i}"),
                    text: format!("text {i}"),
                    rating: None,
                    timestamp: None,
                    source: None,
                })
                .collect(),
            provenance: "prop".into(),
        };
        let params = ClusterParams::default();
        let fast = process_reviews(&corpus, &vectors, &params).unwrap();
        let slow = common::oracle_process_reviews(&corpus, &vectors, &params);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn recommendation_render_parse_round_trips(
        pairs in prop::collection::vec((phrase_strategy(), phrase_strategy()), 1..6)
    ) {
        let recs: Vec<Recommendation> = pairs
            .into_iter()
            .map(|(issue, advice)| Recommendation { issue, advice })
            .collect();
        let rendered: Vec<String> = recs.iter().map(|r| r.render()).collect();
        let parsed = parse_recommendations(&rendered.join("\n\n"));
        prop_assert_eq!(parsed, recs);
    }

    #[test]
    fn build_prompt_never_exceeds_budget(
        review in "[ -~]{1,12000}",
        max_input_tokens in 50usize..3000,
    ) {
        let budget = PromptBudget {
            max_input_tokens,
            max_new_tokens: 512,
            chars_per_token: 4.0,
        };
        let prompt = build_prompt(&review, &PromptTemplate::default(), &budget).unwrap();
        let limit = (max_input_tokens as f64 * 4.0) as usize + TRUNCATION_MARKER.chars().count();
        prop_assert!(prompt.chars().count() <= limit);
    }
}
