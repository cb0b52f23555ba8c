use rand::Rng;

use super::{chars, ModelConfig, Tensor};
use crate::typespace::{Granularity, TypeVocabulary};

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    /// Input weights, `4h × in`, gate blocks ordered input, forget, output, candidate.
    pub w_x: Tensor,
    /// Recurrent weights, `4h × h`.
    pub w_h: Tensor,
    pub b: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    /// `hidden × input`
    pub w: Tensor,
    pub v: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvFilter {
    pub width: usize,
    /// `filters × (width · char_dim)`
    pub w: Tensor,
    pub b: Tensor,
}

/// All learned tensors of the typer.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Before / inside / after the mention, `3 × location_dim`.
    pub location: Tensor,
    pub lstm_fwd: LstmParams,
    pub lstm_bwd: LstmParams,
    pub context_attention: AttentionParams,
    pub mention_attention: AttentionParams,
    pub char_embeddings: Tensor,
    pub char_filters: Vec<ConvFilter>,
    /// Label embeddings `n × repr_dim`; row blocks follow the vocabulary bins.
    pub label_weights: Tensor,
}

fn uniform_fan_in(shape: &[usize], fan_in: usize, rng: &mut impl Rng) -> Tensor {
    Tensor::uniform(shape, 1.0 / (fan_in as f64).sqrt(), rng)
}

impl LstmParams {
    fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let w_x = uniform_fan_in(&[4 * hidden, input], input, rng);
        let w_h = uniform_fan_in(&[4 * hidden, hidden], hidden, rng);
        let mut b = Tensor::zeros(&[4 * hidden]);
        b.data_mut()[hidden..2 * hidden].fill(1.0);
        LstmParams { w_x, w_h, b }
    }

    fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            w_x: Tensor::zeros(&[4 * hidden, input]),
            w_h: Tensor::zeros(&[4 * hidden, hidden]),
            b: Tensor::zeros(&[4 * hidden]),
        }
    }
}

impl AttentionParams {
    fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        AttentionParams {
            w: uniform_fan_in(&[hidden, input], input, rng),
            v: uniform_fan_in(&[hidden], hidden, rng),
        }
    }

    fn zeros(input: usize, hidden: usize) -> Self {
        AttentionParams {
            w: Tensor::zeros(&[hidden, input]),
            v: Tensor::zeros(&[hidden]),
        }
    }
}

impl ModelParams {
    /// Random initialisation: uniform(±1/√fan_in) for weights, zero biases
    /// except the LSTM forget gate (1.0).
    pub fn init(config: &ModelConfig, n_labels: usize, rng: &mut impl Rng) -> Self {
        let h = config.lstm_hidden;
        let input = config.word_dim + config.location_dim;
        let location = uniform_fan_in(&[3, config.location_dim], config.location_dim, rng);
        let lstm_fwd = LstmParams::init(input, h, rng);
        let lstm_bwd = LstmParams::init(input, h, rng);
        let context_attention = AttentionParams::init(2 * h, config.attention_hidden, rng);
        let mention_attention = AttentionParams::init(config.word_dim, config.attention_hidden, rng);
        let char_embeddings = uniform_fan_in(&[chars::VOCAB_SIZE, config.char_dim], config.char_dim, rng);
        let char_filters = config
            .char_filter_widths
            .iter()
            .map(|&width| {
                let fan_in = width * config.char_dim;
                ConvFilter {
                    width,
                    w: uniform_fan_in(&[config.char_filters_per_width, fan_in], fan_in, rng),
                    b: Tensor::zeros(&[config.char_filters_per_width]),
                }
            })
            .collect();
        let d = config.repr_dim();
        let label_weights = uniform_fan_in(&[n_labels, d], d, rng);
        ModelParams {
            location,
            lstm_fwd,
            lstm_bwd,
            context_attention,
            mention_attention,
            char_embeddings,
            char_filters,
            label_weights,
        }
    }

    /// All-zero parameters with the shapes implied by `config`.
    pub fn zeros(config: &ModelConfig, n_labels: usize) -> Self {
        let h = config.lstm_hidden;
        let input = config.word_dim + config.location_dim;
        ModelParams {
            location: Tensor::zeros(&[3, config.location_dim]),
            lstm_fwd: LstmParams::zeros(input, h),
            lstm_bwd: LstmParams::zeros(input, h),
            context_attention: AttentionParams::zeros(2 * h, config.attention_hidden),
            mention_attention: AttentionParams::zeros(config.word_dim, config.attention_hidden),
            char_embeddings: Tensor::zeros(&[chars::VOCAB_SIZE, config.char_dim]),
            char_filters: config
                .char_filter_widths
                .iter()
                .map(|&width| ConvFilter {
                    width,
                    w: Tensor::zeros(&[config.char_filters_per_width, width * config.char_dim]),
                    b: Tensor::zeros(&[config.char_filters_per_width]),
                })
                .collect(),
            label_weights: Tensor::zeros(&[n_labels, config.repr_dim()]),
        }
    }

    /// Tensors in a fixed order; [`ModelParams::names`] gives matching names.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.location];
        for l in [&self.lstm_fwd, &self.lstm_bwd] {
            out.extend([&l.w_x, &l.w_h, &l.b]);
        }
        for a in [&self.context_attention, &self.mention_attention] {
            out.extend([&a.w, &a.v]);
        }
        out.push(&self.char_embeddings);
        for f in &self.char_filters {
            out.extend([&f.w, &f.b]);
        }
        out.push(&self.label_weights);
        out
    }

    pub fn names(&self) -> Vec<String> {
        let mut out = vec!["location".to_string()];
        for dir in ["fwd", "bwd"] {
            for part in ["w_x", "w_h", "b"] {
                out.push(format!("lstm_{dir}.{part}"));
            }
        }
        for name in ["context_attention", "mention_attention"] {
            out.push(format!("{name}.w"));
            out.push(format!("{name}.v"));
        }
        out.push("char_embeddings".into());
        for f in &self.char_filters {
            out.push(format!("char_cnn{}.w", f.width));
            out.push(format!("char_cnn{}.b", f.width));
        }
        out.push("label_weights".into());
        out
    }

    pub fn named(&self) -> Vec<(String, &Tensor)> {
        self.names().into_iter().zip(self.tensors()).collect()
    }

    /// Mutable view in the same order as [`ModelParams::named`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = vec![&mut self.location];
        for l in [&mut self.lstm_fwd, &mut self.lstm_bwd] {
            out.push(&mut l.w_x);
            out.push(&mut l.w_h);
            out.push(&mut l.b);
        }
        for a in [&mut self.context_attention, &mut self.mention_attention] {
            out.push(&mut a.w);
            out.push(&mut a.v);
        }
        out.push(&mut self.char_embeddings);
        for f in &mut self.char_filters {
            out.push(&mut f.w);
            out.push(&mut f.b);
        }
        out.push(&mut self.label_weights);
        out
    }

    pub fn num_tensors(&self) -> usize {
        13 + 2 * self.char_filters.len()
    }

    /// Rows of the label matrix belonging to one granularity bin.
    pub fn label_block<'a>(&'a self, vocab: &TypeVocabulary, bin: Granularity) -> &'a [f64] {
        let d = self.label_weights.cols();
        let r = vocab.range(bin);
        &self.label_weights.data()[r.start * d..r.end * d]
    }
}
