use std::collections::BTreeSet;

use crate::corpus::{MentionSpan, ParsedSentence};
use crate::typespace::{normalize_label, TypeVocabulary};

/// Head token of a span: the token whose head lies outside the span (or is the
/// root). With several such tokens (a malformed parse) the leftmost NOUN/PROPN
/// wins, else the leftmost; with none (a cycle) the same tie-break runs over the
/// whole span. Always returns a 0-based position inside the span.
pub fn find_head(sentence: &ParsedSentence, span: MentionSpan) -> usize {
    let external: Vec<usize> = (span.start..span.end)
        .filter(|&p| match sentence.head_of(p) {
            None => true,
            Some(h) => !span.contains(h),
        })
        .collect();
    let pool: Vec<usize> = if external.is_empty() {
        (span.start..span.end).collect()
    } else {
        external
    };
    if pool.len() == 1 {
        return pool[0];
    }
    pool.iter()
        .copied()
        .find(|&p| sentence.token(p).is_nominal())
        .unwrap_or(pool[0])
}

fn is_modifier_chain(upos: &str) -> bool {
    matches!(upos, "NOUN" | "PROPN" | "ADJ")
}

/// Longest in-vocabulary phrase ending at `head` built from the maximal run of
/// NOUN/PROPN/ADJ tokens immediately to its left (not crossing `left_bound`).
/// The bare head is not considered here.
pub(crate) fn longest_vocab_phrase(
    sentence: &ParsedSentence,
    head: usize,
    left_bound: usize,
    vocab: &TypeVocabulary,
) -> Option<String> {
    let mut start = head;
    while start > left_bound && is_modifier_chain(&sentence.token(start - 1).upos) {
        start -= 1;
    }
    (start..head).find_map(|k| {
        let raw = sentence.tokens()[k..=head]
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        normalize_label(&raw).ok().filter(|p| vocab.contains(p))
    })
}

/// Head word of the mention plus the longest multiword phrase ending at it,
/// normalised and restricted to the vocabulary.
pub fn extract_head_types(sentence: &ParsedSentence, span: MentionSpan, vocab: &TypeVocabulary) -> BTreeSet<String> {
    let head = find_head(sentence, span);
    let mut out = BTreeSet::new();
    if let Ok(label) = normalize_label(&sentence.token(head).surface) {
        if vocab.contains(&label) {
            out.insert(label);
        }
    }
    if let Some(phrase) = longest_vocab_phrase(sentence, head, span.start, vocab) {
        out.insert(phrase);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supervision::testutil::{sentence, vocab};

    #[test]
    fn chairman() {
        let s = sentence(&[
            ("He", "PRON", 2, "nsubj"),
            ("met", "VERB", 0, "root"),
            ("the", "DET", 5, "det"),
            ("incumbent", "ADJ", 5, "amod"),
            ("chairman", "NOUN", 2, "obj"),
            ("of", "ADP", 9, "case"),
            ("the", "DET", 9, "det"),
            ("African", "PROPN", 9, "amod"),
            ("Union", "PROPN", 5, "nmod"),
        ]);
        let span = MentionSpan { start: 2, end: 9 };
        assert_eq!(find_head(&s, span), 4);
        let v = vocab(&["chairman"], &[]);
        assert_eq!(
            extract_head_types(&s, span, &v),
            BTreeSet::from(["chairman".to_string()])
        );
    }

    #[test]
    fn single_token_span() {
        let s = sentence(&[("Dogs", "NOUN", 2, "nsubj"), ("bark", "VERB", 0, "root")]);
        assert_eq!(find_head(&s, MentionSpan { start: 1, end: 2 }), 1);
        assert_eq!(find_head(&s, MentionSpan { start: 0, end: 1 }), 0);
    }

    #[test]
    fn adversarial_two_external_heads() {
        // "big dogs" where the parser attached both tokens to the verb.
        let s = sentence(&[
            ("quickly", "ADV", 4, "advmod"),
            ("big", "ADJ", 4, "nsubj"),
            ("dogs", "NOUN", 4, "nsubj"),
            ("bark", "VERB", 0, "root"),
        ]);
        assert_eq!(find_head(&s, MentionSpan { start: 0, end: 3 }), 2);
        // no nominal among the candidates: leftmost
        assert_eq!(find_head(&s, MentionSpan { start: 0, end: 2 }), 0);
    }

    #[test]
    fn graphics_card() {
        let s = sentence(&[
            ("the", "DET", 4, "det"),
            ("newly-released", "ADJ", 4, "amod"),
            ("graphics", "NOUN", 4, "compound"),
            ("card", "NOUN", 0, "root"),
        ]);
        let v = vocab(&["card"], &["graphics card"]);
        let got = extract_head_types(&s, MentionSpan { start: 0, end: 4 }, &v);
        assert_eq!(got, BTreeSet::from(["card".to_string(), "graphics card".to_string()]));
    }

    #[test]
    fn plural_head_and_noise() {
        let s = sentence(&[
            ("peacemaking", "NOUN", 2, "compound"),
            ("operations", "NOUN", 0, "root"),
        ]);
        let v = vocab(&["operation", "part"], &[]);
        let got = extract_head_types(&s, MentionSpan { start: 0, end: 2 }, &v);
        assert_eq!(got, BTreeSet::from(["operation".to_string()]));

        let s = sentence(&[
            ("parts", "NOUN", 0, "root"),
            ("of", "ADP", 3, "case"),
            ("capital", "NOUN", 1, "nmod"),
        ]);
        let got = extract_head_types(&s, MentionSpan { start: 0, end: 3 }, &v);
        assert_eq!(got, BTreeSet::from(["part".to_string()]));
    }

    #[test]
    fn phrase_does_not_cross_span_start() {
        let s = sentence(&[("tennis", "NOUN", 2, "compound"), ("player", "NOUN", 0, "root")]);
        let v = vocab(&["player"], &["tennis player"]);
        let got = extract_head_types(&s, MentionSpan { start: 1, end: 2 }, &v);
        assert_eq!(got, BTreeSet::from(["player".to_string()]));
    }
}
