//! Finite-difference verification of the analytic gradients on small random models.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{Inputs, Instance, Model};
use super::ModelConfig;
use crate::corpus::{EmbeddingTable, MentionSpan};
use crate::error::Result;
use crate::typespace::{Granularity, TypeVocabulary};

/// Central-difference step.
pub const STEP: f64 = 1e-5;

/// Floor on the denominator of the relative error, so that gradients that
/// are zero up to rounding compare by absolute difference.
pub const REL_FLOOR: f64 = 1e-5;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub elements: usize,
    pub max_rel_error: f64,
}

/// One randomly drawn model plus data.
pub struct Problem {
    pub model: Model,
    pub vocab: TypeVocabulary,
    pub batch: Vec<Instance>,
}

const WORDS: &[&str] = &["the", "Swiss", "player", "won", "a", "title", "in", "Paris", "!"];

/// A model with every dimension in `1..=4`, sentences of at most six tokens
/// and between three and nine labels covering all three bins.
pub fn random_problem(rng: &mut impl Rng) -> Result<Problem> {
    let mut widths: Vec<usize> = (1..=4).collect();
    widths.shuffle(rng);
    widths.truncate(rng.random_range(1..=2));
    widths.sort_unstable();
    let config = ModelConfig {
        word_dim: rng.random_range(1..=4),
        location_dim: rng.random_range(1..=4),
        lstm_hidden: rng.random_range(1..=4),
        attention_hidden: rng.random_range(1..=4),
        char_dim: rng.random_range(1..=4),
        char_filter_widths: widths,
        char_filters_per_width: rng.random_range(1..=4),
        ..ModelConfig::default()
    };

    let n_labels = rng.random_range(3..=9);
    let mut entries = Vec::new();
    for i in 0..n_labels {
        // First three labels pin one per bin; the rest spread at random, kept in bin order.
        let bin = if i < 3 {
            Granularity::ALL[i]
        } else {
            Granularity::ALL[rng.random_range(0..3)]
        };
        entries.push((format!("type{i}"), bin));
    }
    entries.sort_by_key(|(_, b)| *b);
    let vocab = TypeVocabulary::new(entries)?;

    let emb = EmbeddingTable::from_pairs(
        config.word_dim,
        WORDS.iter().take(7).map(|w| {
            (
                w.to_string(),
                (0..config.word_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
        }),
    )?;

    let model = Model::new(config, n_labels, rng)?;
    let mut batch = Vec::new();
    for k in 0..3 {
        let len = rng.random_range(1..=6);
        let tokens: Vec<String> = (0..len)
            .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
            .collect();
        let start = rng.random_range(0..len);
        let end = rng.random_range(start + 1..=len);
        let inputs = Inputs::new(&tokens, MentionSpan { start, end }, &emb, &model.config)?;
        let mut targets: Vec<f64> = (0..n_labels)
            .map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 })
            .collect();
        if k == 0 {
            // One instance with every bin active so all label rows are exercised.
            for bin in Granularity::ALL {
                targets[vocab.range(bin).start] = 1.0;
            }
        } else if targets.iter().all(|&t| t == 0.0) {
            targets[rng.random_range(0..n_labels)] = 1.0;
        }
        batch.push(Instance::new(inputs, targets, &vocab));
    }
    Ok(Problem { model, vocab, batch })
}

/// Largest relative error between analytic and central-difference gradients,
/// per parameter tensor.
pub fn check_gradients(model: &Model, batch: &[Instance]) -> Vec<TensorCheck> {
    let (_, analytic) = model.batch_gradient(batch);
    let names = model.params.names();
    let mut probe = model.clone();
    let mut out = Vec::new();
    for (k, name) in names.into_iter().enumerate() {
        let n = analytic[k].len();
        let mut worst: f64 = 0.0;
        for (j, &grad) in analytic[k].iter().enumerate() {
            let original = probe.params.tensors()[k].data()[j];
            probe.params.tensors_mut()[k].data_mut()[j] = original + STEP;
            let plus = probe.batch_loss(batch);
            probe.params.tensors_mut()[k].data_mut()[j] = original - STEP;
            let minus = probe.batch_loss(batch);
            probe.params.tensors_mut()[k].data_mut()[j] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            worst = worst.max(relative_error(grad, numeric));
        }
        out.push(TensorCheck {
            name,
            elements: n,
            max_rel_error: worst,
        });
    }
    out
}

/// Runs [`check_gradients`] on `cases` random problems drawn from `seed`.
pub fn run(cases: usize, seed: u64) -> Result<Vec<(ModelConfig, Vec<TensorCheck>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| {
            let p = random_problem(&mut rng)?;
            let checks = check_gradients(&p.model, &p.batch);
            Ok((p.model.config, checks))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_models_pass() {
        for (cfg, checks) in run(2, 11).unwrap() {
            for c in checks {
                assert!(c.max_rel_error < 1e-4, "{cfg:?}: {c:?}");
            }
        }
    }
}
