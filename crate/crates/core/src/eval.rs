//! Set-valued prediction metrics: example-averaged (macro) and pooled (micro)
//! precision/recall/F1, strict accuracy, mean reciprocal rank and per-granularity
//! breakdowns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Example;
use crate::error::{Error, Result};
use crate::typespace::{Granularity, TypeVocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prf {
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(p: f64, r: f64) -> Self {
        Prf { p, r, f1: f1(p, r) }
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// (predicted, gold)
pub type Pair<T> = (BTreeSet<T>, BTreeSet<T>);

fn check_pairs<T: Ord>(pairs: &[Pair<T>]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::validation("no examples to score"));
    }
    for (i, (pred, gold)) in pairs.iter().enumerate() {
        if gold.is_empty() {
            return Err(Error::validation(format!("example {i} has an empty gold set")));
        }
        if pred.is_empty() {
            return Err(Error::validation(format!("example {i} has an empty prediction")));
        }
    }
    Ok(())
}

/// Example-averaged P and R; an empty prediction counts as precision 0.
fn macro_unchecked<T: Ord>(pairs: &[Pair<T>]) -> Prf {
    let (mut p, mut r) = (0.0, 0.0);
    for (pred, gold) in pairs {
        let hit = pred.intersection(gold).count() as f64;
        if !pred.is_empty() {
            p += hit / pred.len() as f64;
        }
        r += hit / gold.len() as f64;
    }
    let n = pairs.len() as f64;
    Prf::new(p / n, r / n)
}

pub fn macro_prf<T: Ord>(pairs: &[Pair<T>]) -> Result<Prf> {
    check_pairs(pairs)?;
    Ok(macro_unchecked(pairs))
}

pub fn micro_prf<T: Ord>(pairs: &[Pair<T>]) -> Result<Prf> {
    check_pairs(pairs)?;
    let (mut hit, mut npred, mut ngold) = (0usize, 0usize, 0usize);
    for (pred, gold) in pairs {
        hit += pred.intersection(gold).count();
        npred += pred.len();
        ngold += gold.len();
    }
    Ok(Prf::new(hit as f64 / npred as f64, hit as f64 / ngold as f64))
}

pub fn strict_accuracy<T: Ord>(pairs: &[Pair<T>]) -> Result<f64> {
    check_pairs(pairs)?;
    let exact = pairs.iter().filter(|(pred, gold)| pred == gold).count();
    Ok(exact as f64 / pairs.len() as f64)
}

/// 1-based rank of `label` when labels are sorted by score descending, ties
/// going to the lower id.
pub fn rank_of(scores: &[f64], label: usize) -> usize {
    let s = scores[label];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(i, &v)| v > s || (v == s && i < label))
        .count()
}

/// Mean over examples of the mean reciprocal rank of each gold label.
pub fn mrr(scored: &[(Vec<f64>, BTreeSet<usize>)]) -> Result<f64> {
    if scored.is_empty() {
        return Err(Error::validation("no examples to score"));
    }
    let mut total = 0.0;
    for (i, (scores, gold)) in scored.iter().enumerate() {
        if gold.is_empty() {
            return Err(Error::validation(format!("example {i} has an empty gold set")));
        }
        if let Some(&bad) = gold.iter().find(|&&g| g >= scores.len()) {
            return Err(Error::validation(format!(
                "example {i}: gold label id {bad} outside a score vector of {}",
                scores.len()
            )));
        }
        let sum: f64 = gold.iter().map(|&g| 1.0 / rank_of(scores, g) as f64).sum();
        total += sum / gold.len() as f64;
    }
    Ok(total / scored.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinReport {
    pub p: f64,
    pub r: f64,
    pub f1: f64,
    /// Examples with at least one gold label in the bin.
    pub examples: usize,
    /// Gold label occurrences in the bin.
    pub labels: usize,
}

/// Macro P/R/F1 with predicted and gold sets restricted to each bin. Examples
/// without gold labels in a bin are left out of that bin, and bins with no
/// retained examples are absent.
pub fn per_bin_report(pairs: &[Pair<String>], vocab: &TypeVocabulary) -> Result<BTreeMap<Granularity, BinReport>> {
    check_pairs(pairs)?;
    let mut out = BTreeMap::new();
    for bin in Granularity::ALL {
        let in_bin = |l: &String| vocab.bin_of(l).map(|b| b == bin);
        let mut restricted = Vec::new();
        for (pred, gold) in pairs {
            let mut g = BTreeSet::new();
            for l in gold {
                if in_bin(l)? {
                    g.insert(l.clone());
                }
            }
            if g.is_empty() {
                continue;
            }
            // Predictions outside the vocabulary cannot belong to any bin.
            let p: BTreeSet<String> = pred.iter().filter(|l| matches!(in_bin(l), Ok(true))).cloned().collect();
            restricted.push((p, g));
        }
        if restricted.is_empty() {
            continue;
        }
        let prf = macro_unchecked(&restricted);
        out.insert(
            bin,
            BinReport {
                p: prf.p,
                r: prf.r,
                f1: prf.f1,
                examples: restricted.len(),
                labels: restricted.iter().map(|(_, g)| g.len()).sum(),
            },
        );
    }
    Ok(out)
}

/// One line of a prediction file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
    pub predicted: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub examples: usize,
    pub macro_p: f64,
    pub macro_r: f64,
    pub macro_f1: f64,
    pub micro_p: f64,
    pub micro_r: f64,
    pub micro_f1: f64,
    /// Present when every prediction carries a full score vector.
    pub mrr: Option<f64>,
    pub per_bin: BTreeMap<Granularity, BinReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onto_macro_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onto_micro_f1: Option<f64>,
}

/// Joins predictions to gold examples by id; every gold example needs exactly
/// one prediction and no prediction may name an unknown id.
pub fn join<'a>(
    gold: &'a [Example],
    preds: &'a [PredictionRecord],
) -> Result<Vec<(&'a Example, &'a PredictionRecord)>> {
    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::new();
    for p in preds {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(Error::validation(format!("duplicate prediction for id `{}`", p.id)));
        }
    }
    let mut gold_ids = BTreeSet::new();
    for g in gold {
        if !gold_ids.insert(g.id.as_str()) {
            return Err(Error::validation(format!("duplicate gold id `{}`", g.id)));
        }
    }
    if let Some(p) = preds.iter().find(|p| !gold_ids.contains(p.id.as_str())) {
        return Err(Error::validation(format!(
            "prediction id `{}` is not in the gold file",
            p.id
        )));
    }
    gold.iter()
        .map(|g| {
            by_id
                .get(g.id.as_str())
                .map(|p| (g, *p))
                .ok_or_else(|| Error::validation(format!("no prediction for gold id `{}`", g.id)))
        })
        .collect()
}

/// Scores a prediction file against gold examples. With `ontonotes`, the
/// strict-accuracy and ontology F1 fields are filled in as well.
pub fn evaluate(
    gold: &[Example],
    preds: &[PredictionRecord],
    vocab: Option<&TypeVocabulary>,
    ontonotes: bool,
) -> Result<MetricsReport> {
    let joined = join(gold, preds)?;
    let pairs: Vec<Pair<String>> = joined
        .iter()
        .map(|(g, p)| (p.predicted.iter().cloned().collect(), g.labels.clone()))
        .collect();
    let macro_ = macro_prf(&pairs)?;
    let micro = micro_prf(&pairs)?;

    let mut mrr_value = None;
    let mut per_bin = BTreeMap::new();
    if let Some(vocab) = vocab {
        if joined.iter().all(|(_, p)| p.scores.is_some()) {
            let mut scored = Vec::with_capacity(joined.len());
            for (g, p) in &joined {
                let scores = p.scores.clone().unwrap_or_default();
                if scores.len() != vocab.len() {
                    return Err(Error::validation(format!(
                        "prediction `{}` has {} scores for a vocabulary of {}",
                        p.id,
                        scores.len(),
                        vocab.len()
                    )));
                }
                let ids = g
                    .labels
                    .iter()
                    .map(|l| {
                        vocab.id(l).ok_or_else(|| {
                            Error::validation(format!("gold label `{l}` of `{}` is not in the vocabulary", g.id))
                        })
                    })
                    .collect::<Result<_>>()?;
                scored.push((scores, ids));
            }
            mrr_value = Some(mrr(&scored)?);
        }
        if !ontonotes {
            per_bin = per_bin_report(&pairs, vocab)?;
        }
    }

    let (strict_acc, onto_macro_f1, onto_micro_f1) = if ontonotes {
        (Some(strict_accuracy(&pairs)?), Some(macro_.f1), Some(micro.f1))
    } else {
        (None, None, None)
    };
    Ok(MetricsReport {
        examples: pairs.len(),
        macro_p: macro_.p,
        macro_r: macro_.r,
        macro_f1: macro_.f1,
        micro_p: micro.p,
        micro_r: micro.r,
        micro_f1: micro.f1,
        mrr: mrr_value,
        per_bin,
        strict_acc,
        onto_macro_f1,
        onto_micro_f1,
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation cannot fail")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "examples: {}", self.examples);
        let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", "", "P", "R", "F1");
        let _ = writeln!(
            out,
            "{:<10} {:>8.4} {:>8.4} {:>8.4}",
            "macro", self.macro_p, self.macro_r, self.macro_f1
        );
        let _ = writeln!(
            out,
            "{:<10} {:>8.4} {:>8.4} {:>8.4}",
            "micro", self.micro_p, self.micro_r, self.micro_f1
        );
        if let Some(m) = self.mrr {
            let _ = writeln!(out, "MRR: {m:.4}");
        }
        if !self.per_bin.is_empty() {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>8} {:>8} {:>9} {:>7}",
                "bin", "P", "R", "F1", "examples", "labels"
            );
            for (bin, b) in &self.per_bin {
                let _ = writeln!(
                    out,
                    "{:<10} {:>8.4} {:>8.4} {:>8.4} {:>9} {:>7}",
                    bin.as_str(),
                    b.p,
                    b.r,
                    b.f1,
                    b.examples,
                    b.labels
                );
            }
        }
        if let (Some(acc), Some(ma), Some(mi)) = (self.strict_acc, self.onto_macro_f1, self.onto_micro_f1) {
            let _ = writeln!(out, "strict accuracy: {acc:.4}");
            let _ = writeln!(out, "ontology macro F1: {ma:.4}");
            let _ = writeln!(out, "ontology micro F1: {mi:.4}");
        }
        out
    }
}
