use std::collections::BTreeSet;

use super::head::longest_vocab_phrase;
use crate::corpus::ParsedSentence;
use crate::typespace::{normalize_label, TypeVocabulary};

/// Dependency relation names the definition miner keys on. Subtypes
/// (`conj:and`) match their base relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationNames {
    pub copula: String,
    pub appositive: String,
    pub conjunct: String,
}

impl Default for RelationNames {
    fn default() -> Self {
        RelationNames {
            copula: "cop".into(),
            appositive: "appos".into(),
            conjunct: "conj".into(),
        }
    }
}

fn base_rel(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

/// Type nouns of an "X is a Y" definition sentence: nominals carrying a copula
/// dependent, closed under appositive and conjunct edges between nominals, each
/// optionally extended to a multiword vocabulary phrase.
pub fn extract_definition_types(
    sentence: &ParsedSentence,
    vocab: &TypeVocabulary,
    relations: &RelationNames,
) -> BTreeSet<String> {
    let n = sentence.len();
    let mut selected = vec![false; n];
    for pos in 0..n {
        if base_rel(&sentence.token(pos).deprel) != relations.copula {
            continue;
        }
        if let Some(h) = sentence.head_of(pos) {
            if sentence.token(h).is_nominal() {
                selected[h] = true;
            }
        }
    }
    if !selected.contains(&true) {
        return BTreeSet::new();
    }

    // Undirected closure over appos/conj edges, restricted to nominals.
    let linked = |rel: &str| rel == relations.appositive || rel == relations.conjunct;
    loop {
        let mut changed = false;
        for pos in 0..n {
            let tok = sentence.token(pos);
            let Some(h) = sentence.head_of(pos) else { continue };
            if !linked(base_rel(&tok.deprel)) {
                continue;
            }
            if !(tok.is_nominal() && sentence.token(h).is_nominal()) {
                continue;
            }
            if selected[pos] != selected[h] {
                selected[pos] = true;
                selected[h] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = BTreeSet::new();
    for pos in (0..n).filter(|&p| selected[p]) {
        if let Ok(label) = normalize_label(&sentence.token(pos).surface) {
            if vocab.contains(&label) {
                out.insert(label);
            }
        }
        if let Some(phrase) = longest_vocab_phrase(sentence, pos, 0, vocab) {
            out.insert(phrase);
        }
    }
    out
}

/// Definition types of an article: only its first sentence is mined.
pub fn extract_article_types(
    article: &[ParsedSentence],
    vocab: &TypeVocabulary,
    relations: &RelationNames,
) -> BTreeSet<String> {
    article
        .first()
        .map(|s| extract_definition_types(s, vocab, relations))
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supervision::testutil::{sentence, vocab};

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn federer() -> ParsedSentence {
        sentence(&[
            ("Roger", "PROPN", 8, "nsubj"),
            ("Federer", "PROPN", 1, "flat"),
            ("is", "AUX", 8, "cop"),
            ("a", "DET", 8, "det"),
            ("Swiss", "ADJ", 8, "amod"),
            ("professional", "ADJ", 8, "amod"),
            ("tennis", "NOUN", 8, "compound"),
            ("player", "NOUN", 0, "root"),
            (".", "PUNCT", 8, "punct"),
        ])
    }

    #[test]
    fn copular_definition() {
        let v = vocab(&["player"], &["tennis player"]);
        assert_eq!(
            extract_definition_types(&federer(), &v, &RelationNames::default()),
            set(&["player", "tennis player"])
        );
    }

    #[test]
    fn conjunction() {
        let s = sentence(&[
            ("X", "PROPN", 4, "nsubj"),
            ("is", "AUX", 4, "cop"),
            ("a", "DET", 4, "det"),
            ("singer", "NOUN", 0, "root"),
            ("and", "CCONJ", 6, "cc"),
            ("songwriter", "NOUN", 4, "conj"),
            (".", "PUNCT", 4, "punct"),
        ]);
        let v = vocab(&["singer", "songwriter"], &[]);
        assert_eq!(
            extract_definition_types(&s, &v, &RelationNames::default()),
            set(&["singer", "songwriter"])
        );
    }

    #[test]
    fn no_copula() {
        let s = sentence(&[
            ("Toyota", "PROPN", 2, "nsubj"),
            ("recalled", "VERB", 0, "root"),
            ("vehicles", "NOUN", 2, "obj"),
        ]);
        let v = vocab(&["vehicle", "manufacturer"], &[]);
        assert!(extract_definition_types(&s, &v, &RelationNames::default()).is_empty());
    }

    #[test]
    fn custom_relation_names() {
        let s = sentence(&[
            ("X", "PROPN", 3, "nsubj"),
            ("is", "AUX", 3, "copula"),
            ("singer", "NOUN", 0, "root"),
        ]);
        let v = vocab(&["singer"], &[]);
        assert!(extract_definition_types(&s, &v, &RelationNames::default()).is_empty());
        let rel = RelationNames {
            copula: "copula".into(),
            ..RelationNames::default()
        };
        assert_eq!(extract_definition_types(&s, &v, &rel), set(&["singer"]));
    }

    #[test]
    fn article_uses_first_sentence_only() {
        let v = vocab(&["player", "singer"], &["tennis player"]);
        let second = sentence(&[
            ("He", "PRON", 3, "nsubj"),
            ("is", "AUX", 3, "cop"),
            ("singer", "NOUN", 0, "root"),
        ]);
        let got = extract_article_types(&[federer(), second], &v, &RelationNames::default());
        assert_eq!(got, set(&["player", "tennis player"]));
        assert!(extract_article_types(&[], &v, &RelationNames::default()).is_empty());
    }
}
