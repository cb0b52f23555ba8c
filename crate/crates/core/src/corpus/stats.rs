use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Example;
use crate::error::{Error, Result};

/// Label mass where each example spreads a total weight of 1 evenly over its labels.
pub fn label_weights(examples: &[Example]) -> Result<BTreeMap<String, f64>> {
    let mut weights = BTreeMap::new();
    for ex in examples {
        if ex.labels.is_empty() {
            return Err(Error::validation(format!("example `{}` has no labels", ex.id)));
        }
        let share = 1.0 / ex.labels.len() as f64;
        for label in &ex.labels {
            *weights.entry(label.clone()).or_insert(0.0) += share;
        }
    }
    Ok(weights)
}

/// Labels with their weights, heaviest first, ties broken lexicographically.
pub fn ranked_labels(examples: &[Example]) -> Result<Vec<(String, f64)>> {
    if examples.is_empty() {
        return Err(Error::validation("no examples to rank labels over"));
    }
    let mut ranked: Vec<(String, f64)> = label_weights(examples)?.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Cumulative fraction of label mass covered by the top-k labels, for every k.
///
/// Labels are ranked by weight, ties broken lexicographically. The last point is
/// exactly 1.0.
pub fn coverage_curve(examples: &[Example]) -> Result<Vec<(usize, f64)>> {
    let ranked = ranked_labels(examples)?;
    let total: f64 = ranked.iter().map(|(_, w)| w).sum();
    let mut cumulative = 0.0;
    Ok(ranked
        .iter()
        .enumerate()
        .map(|(k, (_, w))| {
            cumulative += w;
            (k + 1, cumulative / total)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle followed by floor allocation of dev and test; the remainder
/// goes to train.
pub fn split_dataset<T: Clone>(items: &[T], ratios: [f64; 3], seed: u64) -> Result<Split<T>> {
    if ratios.iter().any(|r| r.is_nan() || *r <= 0.0) {
        return Err(Error::validation(format!("split ratios must be positive: {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!("split ratios sum to {sum}, expected 1")));
    }
    let n = items.len();
    // Tolerance so that e.g. 0.29 * 100 floors to 29 rather than 28.
    let alloc = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let n_dev = alloc(ratios[1]);
    let n_test = alloc(ratios[2]);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    let n_train = n - n_dev - n_test;
    Ok(Split {
        train: pick(&order[..n_train]),
        dev: pick(&order[n_train..n_train + n_dev]),
        test: pick(&order[n_train + n_dev..]),
    })
}
