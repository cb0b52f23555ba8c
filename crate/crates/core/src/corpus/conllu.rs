//! Minimal CoNLL-U reader.
//!
//! Only the ID, FORM, LEMMA, UPOS, HEAD and DEPREL columns are kept. Multiword
//! token ranges (`3-4`) and empty nodes (`5.1`) are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    /// 1-based head position, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn is_nominal(&self) -> bool {
        matches!(self.upos.as_str(), "NOUN" | "PROPN")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedSentence {
    tokens: Vec<Token>,
}

impl ParsedSentence {
    /// Builds a sentence, checking the tree invariants: contiguous 1-based ids,
    /// heads in range, no self-loops and a single root.
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        let n = tokens.len();
        if n == 0 {
            return Err(Error::validation("empty sentence"));
        }
        let mut roots = 0;
        for (pos, tok) in tokens.iter().enumerate() {
            if tok.index != pos + 1 {
                return Err(Error::validation(format!(
                    "token `{}` has id {} but is at position {}",
                    tok.surface,
                    tok.index,
                    pos + 1
                )));
            }
            if tok.head > n {
                return Err(Error::validation(format!(
                    "token {} `{}` has head {} outside 0..={}",
                    tok.index, tok.surface, tok.head, n
                )));
            }
            if tok.head == tok.index {
                return Err(Error::validation(format!(
                    "token {} `{}` is its own head",
                    tok.index, tok.surface
                )));
            }
            if tok.head == 0 {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(Error::validation(format!("expected exactly one root, found {roots}")));
        }
        Ok(ParsedSentence { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token at a 0-based position.
    pub fn token(&self, pos: usize) -> &Token {
        &self.tokens[pos]
    }

    /// 0-based position of the head of the token at `pos`, `None` for the root.
    pub fn head_of(&self, pos: usize) -> Option<usize> {
        match self.tokens[pos].head {
            0 => None,
            h => Some(h - 1),
        }
    }

    pub fn surfaces(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.surface.clone()).collect()
    }
}

pub fn read_conllu(path: impl AsRef<Path>) -> Result<Vec<ParsedSentence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(BufReader::new(file), path)
}

/// Parses CoNLL-U from any reader; `origin` is only used in error messages.
pub fn parse_conllu(reader: impl BufRead, origin: impl AsRef<Path>) -> Result<Vec<ParsedSentence>> {
    let origin = origin.as_ref();
    let mut sentences = Vec::new();
    let mut pending: Vec<Token> = Vec::new();
    let mut start_line = 1;

    let flush = |pending: &mut Vec<Token>, start_line: usize, sentences: &mut Vec<ParsedSentence>| {
        if pending.is_empty() {
            return Ok(());
        }
        let tokens = std::mem::take(pending);
        match ParsedSentence::new(tokens) {
            Ok(s) => {
                sentences.push(s);
                Ok(())
            }
            Err(Error::Validation(msg)) => Err(Error::validation(format!(
                "{}: sentence {} (line {start_line}): {msg}",
                origin.display(),
                sentences.len() + 1
            ))),
            Err(e) => Err(e),
        }
    };

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut pending, start_line, &mut sentences)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if pending.is_empty() {
            start_line = lineno;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: usize = id
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("invalid token id `{id}`")))?;
        if index == 0 {
            return Err(Error::parse(origin, lineno, "token id must be at least 1"));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("invalid head `{}`", cols[6])))?;
        let lemma = if cols[2] == "_" { "" } else { cols[2] };
        pending.push(Token {
            index,
            surface: cols[1].to_string(),
            lemma: lemma.to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut pending, start_line, &mut sentences)?;
    Ok(sentences)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<ParsedSentence>> {
        parse_conllu(s.as_bytes(), "<test>")
    }

    fn row(id: &str, form: &str, upos: &str, head: usize, rel: &str) -> String {
        format!(
            "{id}\t{form}\t{}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n",
            form.to_lowercase()
        )
    }

    #[test]
    fn minimal_sentence() {
        let text = row("1", "Dogs", "NOUN", 0, "root") + &row("2", "bark", "VERB", 1, "dep");
        let sents = parse(&text).unwrap();
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].len(), 2);
        assert_eq!(sents[0].head_of(0), None);
        assert_eq!(sents[0].head_of(1), Some(0));
        assert_eq!(sents[0].token(0).lemma, "dogs");
    }

    #[test]
    fn empty_input() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn head_out_of_range() {
        let text = row("1", "a", "X", 0, "root") + &row("2", "b", "X", 7, "dep") + &row("3", "c", "X", 1, "dep");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("sentence 1"), "{err}");
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let text = "# c\n1\tDogs\tdog\tNOUN\t0\troot\n";
        match parse(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn skips_ranges_and_empty_nodes() {
        let text = row("1-2", "vámonos", "_", 0, "_")
            + &row("1", "vamos", "VERB", 0, "root")
            + &row("2", "nos", "PRON", 1, "obj")
            + &row("2.1", "x", "X", 0, "_")
            + "\n"
            + &row("1", "Hi", "INTJ", 0, "root");
        let sents = parse(&text).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0].surfaces(), vec!["vamos", "nos"]);
    }

    #[test]
    fn rejects_two_roots_and_self_loops() {
        let two_roots = row("1", "a", "X", 0, "root") + &row("2", "b", "X", 0, "root");
        assert!(parse(&two_roots).is_err());
        let self_loop = row("1", "a", "X", 0, "root") + &row("2", "b", "X", 2, "dep");
        assert!(parse(&self_loop).is_err());
    }
}
