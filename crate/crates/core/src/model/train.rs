use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{target_vector, InputOptions, Inputs, Instance, Model};
use super::ModelConfig;
use crate::corpus::{EmbeddingTable, Example, Source};
use crate::error::{Error, Result};
use crate::typespace::TypeVocabulary;

struct SourceQueue {
    source: Source,
    order: Vec<usize>,
    cursor: usize,
}

/// Draws the same number of examples from every non-empty source. Each source
/// is visited in a shuffled order that is reshuffled once exhausted.
pub struct BalancedSampler {
    queues: Vec<SourceQueue>,
}

impl BalancedSampler {
    pub fn new(sizes: &[(Source, usize)], rng: &mut impl Rng) -> Result<Self> {
        let mut queues = Vec::new();
        for &(source, n) in sizes {
            if n == 0 {
                continue;
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            queues.push(SourceQueue {
                source,
                order,
                cursor: 0,
            });
        }
        if queues.is_empty() {
            return Err(Error::validation("no training examples in any source"));
        }
        Ok(BalancedSampler { queues })
    }

    pub fn sources(&self) -> impl Iterator<Item = Source> + '_ {
        self.queues.iter().map(|q| q.source)
    }

    /// `per_source` (source, index) pairs for each source, sources in the order given.
    pub fn next_batch(&mut self, per_source: usize, rng: &mut impl Rng) -> Vec<(Source, usize)> {
        let mut batch = Vec::with_capacity(per_source * self.queues.len());
        for q in &mut self.queues {
            for _ in 0..per_source {
                if q.cursor == q.order.len() {
                    q.order.shuffle(rng);
                    q.cursor = 0;
                }
                batch.push((q.source, q.order[q.cursor]));
                q.cursor += 1;
            }
        }
        batch
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogEntry {
    pub iteration: usize,
    pub loss: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub entries: Vec<LogEntry>,
}

impl TrainLog {
    /// `iteration<TAB>loss<TAB>seconds` with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("iteration\tloss\tseconds\n");
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{:?}\t{:.3}", e.iteration, e.loss, e.seconds);
        }
        out
    }

    pub fn losses(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.loss).collect()
    }
}

/// Passed to the observer after every update.
pub struct IterationReport<'a> {
    pub iteration: usize,
    pub loss: f64,
    pub seconds: f64,
    pub batch: &'a [(Source, usize)],
}

/// Rescales `grads` in place so their global L2 norm is at most `max_norm`;
/// returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [Vec<f64>], max_norm: f64) -> f64 {
    let norm = grads.iter().flatten().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        grads.iter_mut().flatten().for_each(|g| *g *= scale);
    }
    norm
}

struct Prepared {
    example: usize,
    inputs: Inputs,
    targets: Vec<f64>,
}

fn prepare(
    source: Source,
    examples: &[Example],
    config: &ModelConfig,
    vocab: &TypeVocabulary,
    emb: &EmbeddingTable,
) -> Result<Vec<Prepared>> {
    examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            if ex.labels.is_empty() {
                return Err(Error::validation(format!("{source} example `{}` has no labels", ex.id)));
            }
            let targets = target_vector(&ex.labels, vocab)
                .map_err(|e| Error::validation(format!("{source} example `{}`: {e}", ex.id)))?;
            let inputs = Inputs::new(&ex.tokens, ex.mention, emb, config)?;
            Ok(Prepared {
                example: i,
                inputs,
                targets,
            })
        })
        .collect()
}

/// Trains a fresh model on the given sources.
///
/// Parameters are initialised from `config.seed`, then the same generator
/// drives sampling and dropout, so a run is reproducible from its inputs.
pub fn train(
    sources: &BTreeMap<Source, Vec<Example>>,
    config: &ModelConfig,
    vocab: &TypeVocabulary,
    emb: &EmbeddingTable,
    observer: &mut dyn FnMut(&IterationReport<'_>),
) -> Result<(Model, TrainLog)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = Model::new(config.clone(), vocab.len(), &mut rng)?;

    let mut prepared: BTreeMap<Source, Vec<Prepared>> = BTreeMap::new();
    for (&source, examples) in sources {
        prepared.insert(source, prepare(source, examples, config, vocab, emb)?);
    }
    let sizes: Vec<(Source, usize)> = prepared.iter().map(|(s, p)| (*s, p.len())).collect();
    let mut sampler = BalancedSampler::new(&sizes, &mut rng)?;
    log::info!(
        "training on {} with {} examples per source per iteration",
        sizes
            .iter()
            .map(|(s, n)| format!("{s}={n}"))
            .collect::<Vec<_>>()
            .join(", "),
        config.batch_size
    );

    let names = model.params.names();
    let start = Instant::now();
    let mut log = TrainLog::default();
    for iteration in 1..=config.iterations {
        let batch = sampler.next_batch(config.batch_size, &mut rng);
        let mut instances = Vec::with_capacity(batch.len());
        for &(source, idx) in &batch {
            let p = &prepared[&source][idx];
            let perturbed = source == Source::Head && (config.head_dropout > 0.0 || config.mask_mention_surface);
            let inputs = if perturbed {
                let ex = &sources[&source][p.example];
                let mut options = InputOptions::dropout(ex.mention.len(), config.head_dropout, &mut rng);
                options.mask_surface = config.mask_mention_surface;
                Inputs::with_options(&ex.tokens, ex.mention, emb, config, &options)?
            } else {
                p.inputs.clone()
            };
            instances.push(Instance::new(inputs, p.targets.clone(), vocab));
        }

        let (loss, mut grads) = model.batch_gradient(&instances);
        for (name, g) in names.iter().zip(&grads) {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient(format!("{name} at iteration {iteration}")));
            }
        }
        clip_global_norm(&mut grads, config.clip_norm);
        for (tensor, g) in model.params.tensors_mut().into_iter().zip(&grads) {
            for (p, g) in tensor.data_mut().iter_mut().zip(g) {
                *p -= config.learning_rate * g;
            }
        }

        let seconds = start.elapsed().as_secs_f64();
        observer(&IterationReport {
            iteration,
            loss,
            seconds,
            batch: &batch,
        });
        log.entries.push(LogEntry {
            iteration,
            loss,
            seconds,
        });
    }
    Ok((model, log))
}
