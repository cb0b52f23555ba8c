//! Batch drivers that turn parsed corpora plus sidecar records into examples.

use std::collections::BTreeSet;
use std::fmt;

use serde::Deserialize;

use super::{extract_definition_types, extract_head_types, map_kb_types, should_link, LinkCandidate, RelationNames};
use crate::corpus::{Example, MentionSpan, ParsedSentence, Source};
use crate::error::{Error, Result};
use crate::typespace::{assign_negative, map_nouns_to_ontology, normalize_label, OntologyMapping, TypeVocabulary};

/// Mention sidecar for head-word extraction.
#[derive(Clone, Debug, Deserialize)]
pub struct MentionRecord {
    pub sent: usize,
    pub start: usize,
    pub end: usize,
    #[serde(default)]
    pub id: Option<String>,
}

/// Entity sidecar for definition mining: `sent` indexes the entity's definition
/// sentence, `tokens`/`mention` give the linked mention in context. When
/// `entity` and `head` are present the conservative linking filter is applied.
#[derive(Clone, Debug, Deserialize)]
pub struct EntityRecord {
    pub sent: usize,
    pub id: String,
    pub tokens: Vec<String>,
    pub mention: MentionSpan,
    #[serde(default)]
    pub entity: Option<String>,
    #[serde(default)]
    pub head: Option<String>,
}

/// Linked mention with knowledge-base types.
#[derive(Clone, Debug, Deserialize)]
pub struct CandidateRecord {
    pub mention: String,
    pub head: String,
    pub entity: String,
    pub types: Vec<String>,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub tokens: Option<Vec<String>>,
    #[serde(default)]
    pub span: Option<MentionSpan>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub seen: usize,
    pub kept: usize,
}

impl Counts {
    pub fn dropped(&self) -> usize {
        self.seen - self.kept
    }
}

impl fmt::Display for Counts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} seen, {} kept, {} dropped", self.seen, self.kept, self.dropped())
    }
}

fn sentence_at(sentences: &[ParsedSentence], sent: usize, record: usize) -> Result<&ParsedSentence> {
    sentences.get(sent).ok_or_else(|| {
        Error::validation(format!(
            "record {record}: sentence index {sent} out of range ({} sentences)",
            sentences.len()
        ))
    })
}

pub fn head_examples(
    sentences: &[ParsedSentence],
    mentions: &[MentionRecord],
    vocab: &TypeVocabulary,
) -> Result<(Vec<Example>, Counts)> {
    let mut out = Vec::new();
    let mut counts = Counts::default();
    for (i, m) in mentions.iter().enumerate() {
        let sentence = sentence_at(sentences, m.sent, i + 1)?;
        let span = MentionSpan::new(m.start, m.end, sentence.len())
            .map_err(|e| Error::validation(format!("record {}: {e}", i + 1)))?;
        counts.seen += 1;
        let labels = extract_head_types(sentence, span, vocab);
        if labels.is_empty() {
            continue;
        }
        counts.kept += 1;
        let id =
            m.id.clone()
                .unwrap_or_else(|| format!("head-{}-{}-{}", m.sent, m.start, m.end));
        out.push(Example::new(id, sentence.surfaces(), span, labels, Source::Head)?);
    }
    Ok((out, counts))
}

pub fn definition_examples(
    sentences: &[ParsedSentence],
    entities: &[EntityRecord],
    vocab: &TypeVocabulary,
    relations: &RelationNames,
) -> Result<(Vec<Example>, Counts)> {
    let mut out = Vec::new();
    let mut counts = Counts::default();
    for (i, e) in entities.iter().enumerate() {
        let sentence = sentence_at(sentences, e.sent, i + 1)?;
        e.mention
            .check(e.tokens.len())
            .map_err(|err| Error::validation(format!("record {}: {err}", i + 1)))?;
        counts.seen += 1;
        if let (Some(entity), Some(head)) = (&e.entity, &e.head) {
            let mention = e.tokens[e.mention.start..e.mention.end].join(" ");
            let cand = LinkCandidate::new(mention, head.clone(), entity.clone(), BTreeSet::new())
                .map_err(|err| Error::validation(format!("record {}: {err}", i + 1)))?;
            if !should_link(&cand) {
                continue;
            }
        }
        let labels = extract_definition_types(sentence, vocab, relations);
        if labels.is_empty() {
            continue;
        }
        counts.kept += 1;
        out.push(Example::new(
            e.id.clone(),
            e.tokens.clone(),
            e.mention,
            labels,
            Source::ElDef,
        )?);
    }
    Ok((out, counts))
}

/// Applies the linking filter to candidates and emits KB-typed examples.
/// Candidate types are normalised and restricted to the vocabulary.
pub fn link_examples(candidates: &[CandidateRecord], vocab: &TypeVocabulary) -> Result<(Vec<Example>, Counts)> {
    let mut out = Vec::new();
    let mut counts = Counts::default();
    for (i, c) in candidates.iter().enumerate() {
        let ctx = |e: Error| Error::validation(format!("record {}: {e}", i + 1));
        let cand = LinkCandidate::new(
            c.mention.clone(),
            c.head.clone(),
            c.entity.clone(),
            c.types
                .iter()
                .map(|t| normalize_label(t))
                .collect::<Result<_>>()
                .map_err(ctx)?,
        )
        .map_err(ctx)?;
        let (Some(tokens), Some(span)) = (&c.tokens, c.span) else {
            return Err(Error::validation(format!(
                "record {}: candidate needs `tokens` and `span` to become an example",
                i + 1
            )));
        };
        span.check(tokens.len()).map_err(ctx)?;
        counts.seen += 1;
        if !should_link(&cand) {
            continue;
        }
        let labels: BTreeSet<String> = cand.entity_types.into_iter().filter(|t| vocab.contains(t)).collect();
        if labels.is_empty() {
            continue;
        }
        counts.kept += 1;
        let id = c.id.clone().unwrap_or_else(|| format!("link-{}", i + 1));
        out.push(Example::new(id, tokens.clone(), span, labels, Source::ElKb)?);
    }
    Ok((out, counts))
}

/// Rewrites ontology-path labels (prior KB-typed data) to vocabulary nouns.
pub fn kb_examples(examples: &[Example], mapping: &OntologyMapping, vocab: &TypeVocabulary) -> (Vec<Example>, Counts) {
    let mut out = Vec::new();
    let mut counts = Counts::default();
    for ex in examples {
        counts.seen += 1;
        let labels: BTreeSet<String> = map_kb_types(&ex.labels, mapping)
            .into_iter()
            .filter(|l| vocab.contains(l))
            .collect();
        if labels.is_empty() {
            continue;
        }
        counts.kept += 1;
        out.push(Example {
            labels,
            source: Source::ElKb,
            ..ex.clone()
        });
    }
    (out, counts)
}

/// Rewrites noun labels to ancestor-closed ontology paths; unmapped examples
/// become `/other` negatives. Sources are preserved.
pub fn ontology_examples(examples: &[Example], mapping: &OntologyMapping) -> (Vec<Example>, Counts) {
    let out: Vec<Example> = examples
        .iter()
        .map(|ex| Example {
            labels: assign_negative(map_nouns_to_ontology(&ex.labels, mapping)),
            ..ex.clone()
        })
        .collect();
    let counts = Counts {
        seen: examples.len(),
        kept: out.len(),
    };
    (out, counts)
}
