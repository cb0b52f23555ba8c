use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::normalize_label;
use crate::error::{Error, Result};

/// Type granularity bin. Declaration order is the id order inside a vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    General,
    Fine,
    Ultra,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [Granularity::General, Granularity::Fine, Granularity::Ultra];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::General => "general",
            Granularity::Fine => "fine",
            Granularity::Ultra => "ultra",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Granularity::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown granularity bin `{s}`")))
    }
}

/// Label inventory with contiguous ids, grouped general, then fine, then ultra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeVocabulary {
    labels: Vec<String>,
    bins: Vec<Granularity>,
    id_of: HashMap<String, usize>,
    ranges: [Range<usize>; 3],
}

impl TypeVocabulary {
    pub fn new(entries: Vec<(String, Granularity)>) -> Result<Self> {
        let mut labels = Vec::with_capacity(entries.len());
        let mut bins = Vec::with_capacity(entries.len());
        let mut id_of = HashMap::with_capacity(entries.len());
        for (label, bin) in entries {
            let canonical = normalize_label(&label)?;
            if canonical != label {
                return Err(Error::validation(format!(
                    "label `{label}` is not canonical (expected `{canonical}`)"
                )));
            }
            if let Some(prev) = bins.last() {
                if bin < *prev {
                    return Err(Error::validation(format!(
                        "label `{label}` ({bin}) follows a {prev} label; bins must be grouped general, fine, ultra"
                    )));
                }
            }
            if id_of.insert(label.clone(), labels.len()).is_some() {
                return Err(Error::validation(format!("duplicate label `{label}`")));
            }
            labels.push(label);
            bins.push(bin);
        }
        let ranges = Granularity::ALL.map(|g| {
            let start = bins.partition_point(|b| *b < g);
            let end = bins.partition_point(|b| *b <= g);
            start..end
        });
        Ok(TypeVocabulary {
            labels,
            bins,
            id_of,
            ranges,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `label<TAB>bin` lines; blank lines and `#` comments are ignored.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, bin) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `label<TAB>bin`"))?;
            let bin = bin
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(origin, i + 1, e.to_string()))?;
            entries.push((label.to_string(), bin));
        }
        Self::new(entries).map_err(|e| match e {
            Error::Validation(msg) => Error::validation(format!("{}: {msg}", origin.display())),
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.id_of.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.id_of.contains_key(label)
    }

    pub fn bin_of(&self, label: &str) -> Result<Granularity> {
        self.id(label)
            .map(|id| self.bins[id])
            .ok_or_else(|| Error::validation(format!("label `{label}` is not in the vocabulary")))
    }

    pub fn bin_of_id(&self, id: usize) -> Granularity {
        self.bins[id]
    }

    /// Id block of a bin; empty when the bin has no labels.
    pub fn range(&self, bin: Granularity) -> Range<usize> {
        self.ranges[bin.index()].clone()
    }

    /// Canonical file form, one `label<TAB>bin` line per label.
    pub fn to_tsv(&self) -> String {
        self.labels
            .iter()
            .zip(&self.bins)
            .map(|(l, b)| format!("{l}\t{b}\n"))
            .collect()
    }

    /// SHA-256 of the canonical file form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_tsv().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> TypeVocabulary {
        TypeVocabulary::parse(
            "person\tgeneral\nlocation\tgeneral\nathlete\tfine\nfilm\tfine\ncomposer\tultra\n",
            "v.tsv",
        )
        .unwrap()
    }

    #[test]
    fn bins() {
        let v = vocab();
        assert_eq!(v.bin_of("person").unwrap(), Granularity::General);
        assert_eq!(v.bin_of("athlete").unwrap(), Granularity::Fine);
        assert_eq!(v.bin_of("composer").unwrap(), Granularity::Ultra);
        assert!(v.bin_of("xylophone").is_err());
        assert_eq!(v.range(Granularity::General), 0..2);
        assert_eq!(v.range(Granularity::Fine), 2..4);
        assert_eq!(v.range(Granularity::Ultra), 4..5);
    }

    #[test]
    fn empty_bins_have_empty_ranges() {
        let v = TypeVocabulary::parse("person\tgeneral\ncomposer\tultra\n", "v").unwrap();
        assert!(v.range(Granularity::Fine).is_empty());
        assert_eq!(v.range(Granularity::Ultra), 1..2);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(TypeVocabulary::parse("athlete\tfine\nperson\tgeneral\n", "v").is_err());
        assert!(TypeVocabulary::parse("person\tgeneral\nperson\tgeneral\n", "v").is_err());
        assert!(TypeVocabulary::parse("persons\tgeneral\n", "v").is_err());
        assert!(TypeVocabulary::parse("person\tcoarse\n", "v").is_err());
        assert!(TypeVocabulary::parse("person general\n", "v").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = vocab();
        let b = TypeVocabulary::parse(&a.to_tsv(), "copy").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = TypeVocabulary::parse("person\tgeneral\n", "v").unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
