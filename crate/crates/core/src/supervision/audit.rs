use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Example, Source};
use crate::error::{Error, Result};

/// Distant supervision source. Crowd annotations are not distant supervision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Head,
    ElDef,
    ElKb,
}

impl Provenance {
    pub const ALL: [Provenance; 3] = [Provenance::Head, Provenance::ElDef, Provenance::ElKb];
}

impl From<Provenance> for Source {
    fn from(p: Provenance) -> Source {
        match p {
            Provenance::Head => Source::Head,
            Provenance::ElDef => Source::ElDef,
            Provenance::ElKb => Source::ElKb,
        }
    }
}

impl TryFrom<Source> for Provenance {
    type Error = Error;

    fn try_from(s: Source) -> Result<Self> {
        match s {
            Source::Head => Ok(Provenance::Head),
            Source::ElDef => Ok(Provenance::ElDef),
            Source::ElKb => Ok(Provenance::ElKb),
            Source::Crowd => Err(Error::validation("crowd examples are not distant supervision")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupervisionRecord {
    pub example: Example,
    pub provenance: Provenance,
    pub confidence_note: Option<String>,
}

impl SupervisionRecord {
    pub fn new(example: Example, confidence_note: Option<String>) -> Result<Self> {
        let provenance = Provenance::try_from(example.source)
            .map_err(|e| Error::validation(format!("example `{}`: {e}", example.id)))?;
        Ok(SupervisionRecord {
            example,
            provenance,
            confidence_note,
        })
    }
}

/// One line of an audit sheet; `correct` and `annotator_note` are left blank
/// for a human to fill in.
#[derive(Serialize)]
pub struct AuditRow<'a> {
    pub id: &'a str,
    pub source: Source,
    pub sentence: String,
    pub mention: String,
    pub labels: Vec<&'a str>,
    pub confidence_note: Option<&'a str>,
    pub correct: Option<bool>,
    pub annotator_note: String,
}

impl<'a> From<&'a SupervisionRecord> for AuditRow<'a> {
    fn from(r: &'a SupervisionRecord) -> Self {
        AuditRow {
            id: &r.example.id,
            source: r.example.source,
            sentence: r.example.tokens.join(" "),
            mention: r.example.mention_text(),
            labels: r.example.labels.iter().map(String::as_str).collect(),
            confidence_note: r.confidence_note.as_deref(),
            correct: None,
            annotator_note: String::new(),
        }
    }
}

/// Uniform sample of up to `per_source` records from each provenance, in the
/// order head, el_def, el_kb; within a provenance records keep input order.
pub fn sample_audit(records: &[SupervisionRecord], per_source: usize, seed: u64) -> Result<Vec<SupervisionRecord>> {
    if per_source == 0 {
        return Err(Error::validation("per-source sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for prov in Provenance::ALL {
        let mut idx: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.provenance == prov)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        idx.truncate(per_source);
        idx.sort_unstable();
        out.extend(idx.into_iter().map(|i| records[i].clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::MentionSpan;

    fn records(counts: &[(Source, usize)]) -> Vec<SupervisionRecord> {
        let mut out = Vec::new();
        for &(src, n) in counts {
            for i in 0..n {
                let ex = Example::new(
                    format!("{src}-{i}"),
                    vec!["w".into()],
                    MentionSpan { start: 0, end: 1 },
                    ["thing".to_string()],
                    src,
                )
                .unwrap();
                out.push(SupervisionRecord::new(ex, None).unwrap());
            }
        }
        out
    }

    #[test]
    fn hundred_per_source() {
        let recs = records(&[(Source::Head, 500), (Source::ElDef, 500), (Source::ElKb, 500)]);
        let sample = sample_audit(&recs, 100, 3).unwrap();
        assert_eq!(sample.len(), 300);
        for prov in Provenance::ALL {
            assert_eq!(sample.iter().filter(|r| r.provenance == prov).count(), 100);
        }
        assert_eq!(sample, sample_audit(&recs, 100, 3).unwrap());
        assert_ne!(sample, sample_audit(&recs, 100, 4).unwrap());
    }

    #[test]
    fn small_source_taken_whole() {
        let recs = records(&[(Source::Head, 40), (Source::ElKb, 150)]);
        let sample = sample_audit(&recs, 100, 0).unwrap();
        assert_eq!(sample.iter().filter(|r| r.provenance == Provenance::Head).count(), 40);
        assert_eq!(sample.len(), 140);
    }

    #[test]
    fn crowd_is_rejected() {
        let ex = Example::new(
            "c",
            vec!["w".into()],
            MentionSpan { start: 0, end: 1 },
            [],
            Source::Crowd,
        )
        .unwrap();
        assert!(SupervisionRecord::new(ex, None).is_err());
        assert!(sample_audit(&[], 0, 0).is_err());
    }

    #[test]
    fn audit_rows_have_blank_slots() {
        let recs = records(&[(Source::Head, 1)]);
        let json = serde_json::to_string(&AuditRow::from(&recs[0])).unwrap();
        assert!(json.contains(r#""correct":null"#), "{json}");
        assert!(json.contains(r#""annotator_note":"""#), "{json}");
    }
}
