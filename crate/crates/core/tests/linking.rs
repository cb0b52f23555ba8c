use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ufet::supervision::{should_link, LinkCandidate};

/// Containment by padded substring search over space-joined, case-folded words.
fn naive_contains(haystack: &str, needle: &str) -> bool {
    let norm = |s: &str| {
        s.chars()
            .map(|c| {
                if c.is_alphanumeric() {
                    c.to_ascii_lowercase()
                } else {
                    ' '
                }
            })
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
    };
    let (h, n) = (norm(haystack), norm(needle));
    !n.is_empty() && format!(" {h} ").contains(&format!(" {n} "))
}

fn naive_link(mention: &str, head: &str, entity: &str) -> bool {
    naive_contains(mention, entity) && naive_contains(entity, head)
}

fn candidate(mention: &str, head: &str, entity: &str) -> LinkCandidate {
    LinkCandidate::new(mention, head, entity, BTreeSet::new()).unwrap()
}

const POOL: &[&str] = &[
    "Barack",
    "Obama",
    "the",
    "president",
    "Bank",
    "of",
    "America",
    "bank",
    "Paris",
    "Hilton",
    "OBAMA",
    "art",
    "party",
];

fn random_candidate(rng: &mut impl Rng) -> (String, String, String) {
    let mention: Vec<&str> = (0..rng.random_range(1..=4))
        .map(|_| *POOL.choose(rng).unwrap())
        .collect();
    let head = mention.choose(rng).unwrap().to_string();
    let entity: Vec<&str> = (0..rng.random_range(1..=3))
        .map(|_| *POOL.choose(rng).unwrap())
        .collect();
    (mention.join(" "), head, entity.join(" "))
}

#[test]
fn worked_candidates() {
    assert!(should_link(&candidate(
        "president Barack Obama",
        "Obama",
        "Barack Obama"
    )));
    assert!(!should_link(&candidate("the president", "president", "Barack Obama")));
    assert!(!should_link(&candidate("Obama", "Obama", "Barack Obama")));
}

#[test]
fn fifty_fuzzed_candidates_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut positives = 0;
    for _ in 0..50 {
        let (m, h, e) = random_candidate(&mut rng);
        let want = naive_link(&m, &h, &e);
        positives += want as usize;
        assert_eq!(
            should_link(&candidate(&m, &h, &e)),
            want,
            "mention `{m}` head `{h}` entity `{e}`"
        );
    }
    assert!(positives > 0, "fuzz set never links");
}

#[test]
fn case_and_punctuation_are_ignored() {
    assert!(should_link(&candidate("BANK of America's", "BANK", "bank of america")));
    assert!(!should_link(&candidate(
        "Bank of America's CEO",
        "CEO",
        "bank of america"
    )));
    assert!(should_link(&candidate("OBAMA", "OBAMA", "obama")));
    assert!(!should_link(&candidate("the party", "party", "art")));
}

proptest! {
    #[test]
    fn agrees_with_oracle(seed in any::<u64>()) {
        let (m, h, e) = random_candidate(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(should_link(&candidate(&m, &h, &e)), naive_link(&m, &h, &e));
    }
}
