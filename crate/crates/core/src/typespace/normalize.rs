//! Canonical label form: lowercase, single-spaced, final word singular.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const EXCEPTIONS_TSV: &str = include_str!("../../data/plural_exceptions.tsv");

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| {
        EXCEPTIONS_TSV
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| {
                let (plural, singular) = l.split_once('\t').expect("bundled exception table is tab-separated");
                (plural, singular)
            })
            .collect()
    })
}

/// The bundled irregular-plural table as `(plural, singular)` pairs.
pub fn plural_exceptions() -> impl Iterator<Item = (&'static str, &'static str)> {
    exceptions().iter().map(|(p, s)| (*p, *s))
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Stems for which `-es` is a plural suffix rather than part of the singular.
fn takes_es(stem: &str) -> bool {
    let b = stem.as_bytes();
    let n = b.len();
    if n < 2 {
        return false;
    }
    if ["ss", "x", "zz", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
        return true;
    }
    // bus-es, virus-es but not hous-es, caus-es.
    if stem.ends_with("us") {
        return n >= 3 && !is_vowel(b[n - 3]);
    }
    // waltz-es but not priz-es.
    b[n - 1] == b'z' && !is_vowel(b[n - 2])
}

/// One rewrite step of the singularisation chain; returns the input when no rule fires.
fn singular_step(word: &str) -> String {
    if let Some(s) = exceptions().get(word) {
        return (*s).to_string();
    }
    let n = word.len();
    if n > 3 && word.ends_with("ies") {
        return format!("{}y", &word[..n - 3]);
    }
    if n > 3 && word.ends_with("ves") {
        return format!("{}f", &word[..n - 3]);
    }
    if n > 2 && word.ends_with("es") && takes_es(&word[..n - 2]) {
        return word[..n - 2].to_string();
    }
    if n > 1 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
        return word[..n - 1].to_string();
    }
    word.to_string()
}

/// Singularises a single lowercase word. Steps are applied until a fixpoint so
/// the result is always stable under another application.
pub fn singularize(word: &str) -> String {
    let mut cur = word.to_string();
    // Every non-exception step shortens the word and exception targets are
    // fixpoints, so this terminates; the bound is only a backstop.
    for _ in 0..=word.len() {
        let next = singular_step(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Canonicalises a raw label: lowercase, underscores and runs of whitespace
/// collapsed to single spaces, final word singularised.
pub fn normalize_label(raw: &str) -> Result<String> {
    let lowered = raw.to_lowercase().replace('_', " ");
    let mut words: Vec<&str> = lowered.split_whitespace().collect();
    let Some(last) = words.pop() else {
        return Err(Error::validation("empty label"));
    };
    let last = singularize(last);
    words.push(&last);
    Ok(words.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> String {
        normalize_label(s).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(norm("Stations"), "station");
        assert_eq!(norm("graphics card"), "graphics card");
        assert_eq!(norm("countries"), "country");
    }

    #[test]
    fn rule_chain() {
        assert_eq!(norm("people"), "person");
        assert_eq!(norm("Men"), "man");
        assert_eq!(norm("feet"), "foot");
        assert_eq!(norm("wolves"), "wolf");
        assert_eq!(norm("churches"), "church");
        assert_eq!(norm("boxes"), "box");
        assert_eq!(norm("glasses"), "glass");
        assert_eq!(norm("buses"), "bus");
        assert_eq!(norm("houses"), "house");
        assert_eq!(norm("prizes"), "prize");
        assert_eq!(norm("class"), "class");
        assert_eq!(norm("tennis"), "tennis");
        assert_eq!(norm("virus"), "virus");
        assert_eq!(norm("detectives"), "detective");
        assert_eq!(norm("radio_station"), "radio station");
        assert_eq!(norm("  Tennis   Players "), "tennis player");
    }

    #[test]
    fn only_final_word_changes() {
        assert_eq!(norm("Sports Cars"), "sports car");
        assert_eq!(norm("news anchors"), "news anchor");
    }

    #[test]
    fn empty_is_error() {
        assert!(normalize_label("").is_err());
        assert!(normalize_label("  _ ").is_err());
    }

    #[test]
    fn exception_targets_are_fixpoints() {
        for (plural, singular) in plural_exceptions() {
            assert_eq!(singularize(singular), singular, "{plural} -> {singular}");
        }
    }

    /// Independent reading of the suffix rules for a handful of regular plurals.
    #[test]
    fn suffix_rules_against_table() {
        let table = [
            ("countries", "country"),
            ("cities", "city"),
            ("leaves", "leaf"),
            ("matches", "match"),
            ("bushes", "bush"),
            ("taxes", "tax"),
            ("buzzes", "buzz"),
            ("waltzes", "waltz"),
            ("cars", "car"),
            ("cases", "case"),
        ];
        for (plural, singular) in table {
            assert_eq!(singularize(plural), singular);
        }
    }
}
