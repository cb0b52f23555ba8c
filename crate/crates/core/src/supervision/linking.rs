use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::typespace::OntologyMapping;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCandidate {
    pub mention_surface: String,
    pub mention_head: String,
    pub entity_name: String,
    pub entity_types: BTreeSet<String>,
}

impl LinkCandidate {
    pub fn new(
        mention_surface: impl Into<String>,
        mention_head: impl Into<String>,
        entity_name: impl Into<String>,
        entity_types: BTreeSet<String>,
    ) -> Result<Self> {
        let c = LinkCandidate {
            mention_surface: mention_surface.into(),
            mention_head: mention_head.into(),
            entity_name: entity_name.into(),
            entity_types,
        };
        let head = words(&c.mention_head);
        if head.len() != 1 {
            return Err(Error::validation(format!(
                "mention head `{}` must be a single token",
                c.mention_head
            )));
        }
        if !contains_words(&c.mention_surface, &c.mention_head) {
            return Err(Error::validation(format!(
                "mention head `{}` does not occur in mention `{}`",
                c.mention_head, c.mention_surface
            )));
        }
        Ok(c)
    }
}

/// Case-folded words, splitting on anything that is not alphanumeric.
fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whole-word, case-insensitive containment of `needle` in `haystack`.
/// An empty needle is never contained.
pub fn contains_words(haystack: &str, needle: &str) -> bool {
    let hay = words(haystack);
    let pin = words(needle);
    !pin.is_empty() && hay.windows(pin.len()).any(|w| w == pin.as_slice())
}

/// Conservative linking: the mention must contain the entity name and the
/// entity name must contain the mention's head.
pub fn should_link(candidate: &LinkCandidate) -> bool {
    contains_words(&candidate.mention_surface, &candidate.entity_name)
        && contains_words(&candidate.entity_name, &candidate.mention_head)
}

/// Maps knowledge-base ontology paths back to vocabulary nouns; unmapped paths
/// are dropped.
pub fn map_kb_types<'a>(
    kb_labels: impl IntoIterator<Item = &'a String>,
    mapping: &OntologyMapping,
) -> BTreeSet<String> {
    kb_labels
        .into_iter()
        .filter_map(|p| mapping.nouns_for(p))
        .flatten()
        .cloned()
        .collect()
}
