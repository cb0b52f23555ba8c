use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Pre-trained word vectors. Unknown words map to the mean of all loaded vectors.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    unk: Vec<f64>,
}

impl EmbeddingTable {
    pub fn from_pairs<I, S>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::validation("embedding dimension must be positive"));
        }
        let mut table = EmbeddingTable {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
            unk: vec![0.0; dim],
        };
        for (word, vec) in pairs {
            let word = word.into();
            if vec.len() != dim {
                return Err(Error::validation(format!(
                    "vector for `{word}` has {} components, expected {dim}",
                    vec.len()
                )));
            }
            table.insert(word, &vec);
        }
        table.finish()?;
        Ok(table)
    }

    fn insert(&mut self, word: String, vec: &[f64]) {
        // First occurrence wins.
        if self.index.contains_key(&word) {
            return;
        }
        self.index.insert(word, self.index.len());
        self.data.extend_from_slice(vec);
    }

    fn finish(&mut self) -> Result<()> {
        let n = self.index.len();
        if n == 0 {
            return Err(Error::validation("embedding table is empty"));
        }
        let mut unk = vec![0.0; self.dim];
        for row in self.data.chunks_exact(self.dim) {
            for (u, v) in unk.iter_mut().zip(row) {
                *u += v;
            }
        }
        for u in &mut unk {
            *u /= n as f64;
        }
        self.unk = unk;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn unk_vector(&self) -> &[f64] {
        &self.unk
    }

    /// Exact match, then lowercase match, else `None`.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        let idx = self.index.get(word).or_else(|| self.index.get(&word.to_lowercase()))?;
        Some(&self.data[idx * self.dim..(idx + 1) * self.dim])
    }

    pub fn lookup(&self, word: &str) -> &[f64] {
        self.get(word).unwrap_or(&self.unk)
    }
}

pub fn read_embeddings(path: impl AsRef<Path>, expected_dim: usize) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), path, expected_dim)
}

pub fn parse_embeddings(reader: impl BufRead, origin: impl AsRef<Path>, expected_dim: usize) -> Result<EmbeddingTable> {
    let origin = origin.as_ref();
    if expected_dim == 0 {
        return Err(Error::validation("embedding dimension must be positive"));
    }
    let mut table = EmbeddingTable {
        dim: expected_dim,
        index: HashMap::new(),
        data: Vec::new(),
        unk: Vec::new(),
    };
    let mut vec = Vec::with_capacity(expected_dim);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let word = parts.next().unwrap_or_default();
        vec.clear();
        for p in parts {
            let v: f64 = p
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("invalid number `{p}`")))?;
            vec.push(v);
        }
        if vec.len() != expected_dim {
            return Err(Error::parse(
                origin,
                i + 1,
                format!("expected {expected_dim} components, found {}", vec.len()),
            ));
        }
        table.insert(word.to_string(), &vec);
    }
    table.finish().map_err(|e| match e {
        Error::Validation(msg) => Error::parse(origin, 0, msg),
        other => other,
    })?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unk_is_mean() {
        let t = parse_embeddings("a 1 0\nb 0 1\n".as_bytes(), "e.txt", 2).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.unk_vector(), &[0.5, 0.5]);
        assert_eq!(t.lookup("a"), &[1.0, 0.0]);
        assert_eq!(t.lookup("zzz"), &[0.5, 0.5]);
        assert_eq!(t.lookup("B"), &[0.0, 1.0]);
    }

    #[test]
    fn dimension_mismatch() {
        match parse_embeddings("a 1 0\nc 1 2 3\n".as_bytes(), "e.txt", 2).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(parse_embeddings("".as_bytes(), "e.txt", 2).is_err());
    }
}
