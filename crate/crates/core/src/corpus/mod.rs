//! Data model and readers: parsed sentences, typed mention examples and word embeddings.

mod conllu;
mod embeddings;
mod stats;

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use conllu::{parse_conllu, read_conllu, ParsedSentence, Token};
pub use embeddings::{parse_embeddings, read_embeddings, EmbeddingTable};
pub use stats::{coverage_curve, label_weights, ranked_labels, split_dataset, Split};

use crate::error::{Error, Result};

/// Where an example's labels came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Crowd,
    Head,
    ElDef,
    ElKb,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::Crowd, Source::Head, Source::ElDef, Source::ElKb];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Crowd => "crowd",
            Source::Head => "head",
            Source::ElDef => "el_def",
            Source::ElKb => "el_kb",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|src| src.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown source tag `{s}`")))
    }
}

/// Half-open token span `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
}

impl MentionSpan {
    pub fn new(start: usize, end: usize, sentence_len: usize) -> Result<Self> {
        let span = MentionSpan { start, end };
        span.check(sentence_len)?;
        Ok(span)
    }

    pub fn check(&self, sentence_len: usize) -> Result<()> {
        if self.start >= self.end || self.end > sentence_len {
            return Err(Error::validation(format!(
                "mention span [{}, {}) is invalid for a sentence of {} tokens",
                self.start, self.end, sentence_len
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Example {
    pub id: String,
    pub tokens: Vec<String>,
    pub mention: MentionSpan,
    pub labels: BTreeSet<String>,
    pub source: Source,
}

#[derive(Deserialize)]
struct RawExample {
    id: String,
    tokens: Vec<String>,
    mention: MentionSpan,
    labels: Vec<String>,
    source: String,
}

impl Example {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        mention: MentionSpan,
        labels: impl IntoIterator<Item = String>,
        source: Source,
    ) -> Result<Self> {
        mention.check(tokens.len())?;
        Ok(Example {
            id: id.into(),
            tokens,
            mention,
            labels: labels.into_iter().collect(),
            source,
        })
    }

    pub fn mention_tokens(&self) -> &[String] {
        &self.tokens[self.mention.start..self.mention.end]
    }

    pub fn mention_text(&self) -> String {
        self.mention_tokens().join(" ")
    }

    /// Parses one JSONL record.
    pub fn from_json(line: &str) -> Result<Self> {
        let raw: RawExample = serde_json::from_str(line).map_err(|e| Error::validation(e.to_string()))?;
        let source: Source = raw.source.parse()?;
        Example::new(raw.id, raw.tokens, raw.mention, raw.labels, source)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("example serialisation cannot fail")
    }
}

/// Reads example JSONL. Label sets may be empty here (unlabelled inputs for
/// prediction); training and scoring reject empty label sets themselves.
pub fn read_examples(path: impl AsRef<Path>) -> Result<Vec<Example>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_examples(BufReader::new(file), path)
}

pub fn parse_examples(reader: impl BufRead, origin: impl AsRef<Path>) -> Result<Vec<Example>> {
    let origin = origin.as_ref();
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ex = Example::from_json(&line).map_err(|e| match e {
            Error::Validation(msg) => Error::parse(origin, i + 1, msg),
            other => other,
        })?;
        out.push(ex);
    }
    Ok(out)
}

/// Reads one JSON record of type `T` per non-blank line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_examples<'a>(
    mut writer: impl Write,
    examples: impl IntoIterator<Item = &'a Example>,
) -> std::io::Result<()> {
    for ex in examples {
        writeln!(writer, "{}", ex.to_json())?;
    }
    Ok(())
}
