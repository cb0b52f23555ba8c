//! Label normalisation, the granularity-binned vocabulary and ontology mapping.

mod normalize;
mod ontology;
mod vocab;

pub use normalize::{normalize_label, plural_exceptions, singularize};
pub use ontology::{assign_negative, expand_ancestors, map_nouns_to_ontology, OntologyMapping, OTHER};
pub use vocab::{Granularity, TypeVocabulary};
