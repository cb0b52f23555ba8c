//! Distant supervision mined from dependency parses.

mod audit;
mod definition;
mod head;
mod linking;
pub mod pipeline;

pub use audit::{sample_audit, AuditRow, Provenance, SupervisionRecord};
pub use definition::{extract_article_types, extract_definition_types, RelationNames};
pub use head::{extract_head_types, find_head};
pub use linking::{contains_words, map_kb_types, should_link, LinkCandidate};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::corpus::{ParsedSentence, Token};
    use crate::typespace::{Granularity, TypeVocabulary};

    pub fn sentence(rows: &[(&str, &str, usize, &str)]) -> ParsedSentence {
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(i, (form, upos, head, rel))| Token {
                index: i + 1,
                surface: form.to_string(),
                lemma: String::new(),
                upos: upos.to_string(),
                head: *head,
                deprel: rel.to_string(),
            })
            .collect();
        ParsedSentence::new(tokens).unwrap()
    }

    pub fn vocab(words: &[&str], phrases: &[&str]) -> TypeVocabulary {
        TypeVocabulary::new(
            words
                .iter()
                .chain(phrases)
                .map(|w| (w.to_string(), Granularity::Ultra))
                .collect(),
        )
        .unwrap()
    }
}
