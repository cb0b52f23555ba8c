//! Noun labels ↔ path-style ontology types (`/person/artist/music`).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use super::normalize_label;
use crate::error::{Error, Result};

/// Label assigned to examples that map to no ontology type.
pub const OTHER: &str = "/other";

fn check_path(path: &str) -> Result<()> {
    let ok = path.len() > 1
        && path.starts_with('/')
        && path[1..]
            .split('/')
            .all(|seg| !seg.is_empty() && !seg.contains(char::is_whitespace));
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!("malformed ontology path `{path}`")))
    }
}

/// The path itself plus every proper prefix down to depth 1.
pub fn expand_ancestors(path: &str) -> Result<BTreeSet<String>> {
    check_path(path)?;
    let mut out = BTreeSet::new();
    let mut cur = path;
    loop {
        out.insert(cur.to_string());
        match cur.rfind('/') {
            Some(0) | None => break,
            Some(i) => cur = &cur[..i],
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OntologyMapping {
    noun_to_path: BTreeMap<String, String>,
    path_to_nouns: BTreeMap<String, BTreeSet<String>>,
    paths: BTreeSet<String>,
}

impl OntologyMapping {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut mapping = OntologyMapping::default();
        for (noun, path) in pairs {
            let canonical = normalize_label(&noun)?;
            if canonical != noun {
                return Err(Error::validation(format!(
                    "mapped noun `{noun}` is not canonical (expected `{canonical}`)"
                )));
            }
            let closure = expand_ancestors(&path)?;
            if let Some(prev) = mapping.noun_to_path.get(&noun) {
                if *prev != path {
                    return Err(Error::validation(format!(
                        "noun `{noun}` mapped to both `{prev}` and `{path}`"
                    )));
                }
            }
            mapping.paths.extend(closure);
            mapping
                .path_to_nouns
                .entry(path.clone())
                .or_default()
                .insert(noun.clone());
            mapping.noun_to_path.insert(noun, path);
        }
        Ok(mapping)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `noun<TAB>/onto/path` lines.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (noun, path) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `noun<TAB>/path`"))?;
            check_path(path.trim()).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
            pairs.push((noun.to_string(), path.trim().to_string()));
        }
        Self::new(pairs)
    }

    pub fn path_of(&self, noun: &str) -> Option<&str> {
        self.noun_to_path.get(noun).map(String::as_str)
    }

    pub fn nouns_for(&self, path: &str) -> Option<&BTreeSet<String>> {
        self.path_to_nouns.get(path)
    }

    /// Every mapped path and its ancestors.
    pub fn paths(&self) -> &BTreeSet<String> {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.noun_to_path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noun_to_path.is_empty()
    }
}

/// Ancestor-closed set of ontology types for a set of canonical nouns; unmapped
/// nouns contribute nothing.
pub fn map_nouns_to_ontology<'a>(
    nouns: impl IntoIterator<Item = &'a String>,
    mapping: &OntologyMapping,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for noun in nouns {
        if let Some(path) = mapping.path_of(noun) {
            out.extend(expand_ancestors(path).expect("mapping paths are validated on load"));
        }
    }
    out
}

/// `{"/other"}` for an empty set, otherwise the set unchanged.
pub fn assign_negative(paths: BTreeSet<String>) -> BTreeSet<String> {
    if paths.is_empty() {
        BTreeSet::from([OTHER.to_string()])
    } else {
        paths
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn mapping() -> OntologyMapping {
        OntologyMapping::parse(
            "person\t/person\ndoctor\t/person/doctor\npolitician\t/person/political_figure\nmusician\t/person/artist/music\n",
            "m.tsv",
        )
        .unwrap()
    }

    #[test]
    fn ancestors() {
        assert_eq!(
            expand_ancestors("/person/political_figure").unwrap(),
            set(&["/person/political_figure", "/person"])
        );
        assert_eq!(
            expand_ancestors("/person/artist/music").unwrap(),
            set(&["/person/artist/music", "/person/artist", "/person"])
        );
        assert_eq!(expand_ancestors("/other").unwrap(), set(&["/other"]));
    }

    #[test]
    fn malformed_paths() {
        for bad in ["", "/", "person", "/person/", "//x", "/a b"] {
            assert!(expand_ancestors(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn noun_mapping() {
        let m = mapping();
        assert_eq!(
            map_nouns_to_ontology(&set(&["doctor"]), &m),
            set(&["/person/doctor", "/person"])
        );
        assert!(map_nouns_to_ontology(&set(&["xylophone"]), &m).is_empty());
        assert!(m.paths().contains("/person/artist"));
    }

    #[test]
    fn union_matches_per_noun_closures() {
        let m = mapping();
        let both = map_nouns_to_ontology(&set(&["doctor", "politician"]), &m);
        let mut expected = BTreeSet::new();
        for noun in ["doctor", "politician"] {
            expected.extend(expand_ancestors(m.path_of(noun).unwrap()).unwrap());
        }
        assert_eq!(both, expected);
    }

    #[test]
    fn negatives() {
        assert_eq!(assign_negative(BTreeSet::new()), set(&["/other"]));
        assert_eq!(assign_negative(set(&["/person"])), set(&["/person"]));
        assert_eq!(assign_negative(set(&["/other"])), set(&["/other"]));
    }

    #[test]
    fn conflicting_mapping_rejected() {
        assert!(OntologyMapping::parse("doctor\t/person/doctor\ndoctor\t/person\n", "m").is_err());
        assert!(OntologyMapping::parse("doctors\t/person/doctor\n", "m").is_err());
    }
}
