use std::borrow::Cow;

use rand::Rng;

use super::tape::{sigmoid, Tape, Var};
use super::{chars, ModelConfig, ModelParams, THRESHOLD};
use crate::corpus::{EmbeddingTable, Example, MentionSpan};
use crate::error::{Error, Result};
use crate::typespace::{Granularity, TypeVocabulary};

/// Location embedding rows.
const BEFORE: usize = 0;
const INSIDE: usize = 1;
const AFTER: usize = 2;

/// Perturbations applied to the mention surface when building inputs.
#[derive(Clone, Debug, Default)]
pub struct InputOptions {
    /// One flag per mention token; `true` zeroes that token's embedding.
    pub dropped: Vec<bool>,
    /// Replace mention words by the unknown vector and mention chars by the unknown char.
    pub mask_surface: bool,
}

impl InputOptions {
    /// Draws a word-dropout mask over `mention_len` tokens.
    pub fn dropout(mention_len: usize, p: f64, rng: &mut impl Rng) -> Self {
        InputOptions {
            dropped: (0..mention_len).map(|_| p > 0.0 && rng.random_bool(p)).collect(),
            mask_surface: false,
        }
    }
}

/// Embedded, featurised form of one mention in context.
#[derive(Clone, Debug)]
pub struct Inputs {
    n_tokens: usize,
    n_mention: usize,
    words: Vec<f64>,
    locations: Vec<usize>,
    mention_words: Vec<f64>,
    chars: Vec<usize>,
}

impl Inputs {
    pub fn new(tokens: &[String], span: MentionSpan, emb: &EmbeddingTable, config: &ModelConfig) -> Result<Self> {
        Inputs::with_options(tokens, span, emb, config, &InputOptions::default())
    }

    pub fn with_options(
        tokens: &[String],
        span: MentionSpan,
        emb: &EmbeddingTable,
        config: &ModelConfig,
        options: &InputOptions,
    ) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::validation("cannot encode an empty sentence"));
        }
        span.check(tokens.len())?;
        if emb.dim() != config.word_dim {
            return Err(Error::Shape(format!(
                "embeddings have dimension {} but the model expects {}",
                emb.dim(),
                config.word_dim
            )));
        }
        if !options.dropped.is_empty() && options.dropped.len() != span.len() {
            return Err(Error::Shape(format!(
                "dropout mask of {} flags for a mention of {} tokens",
                options.dropped.len(),
                span.len()
            )));
        }
        let d = config.word_dim;
        let mut words = Vec::with_capacity(tokens.len() * d);
        let mut locations = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if span.contains(i) {
                locations.push(INSIDE);
                let j = i - span.start;
                if options.dropped.get(j).copied().unwrap_or(false) {
                    words.extend(std::iter::repeat_n(0.0, d));
                } else if options.mask_surface {
                    words.extend_from_slice(emb.unk_vector());
                } else {
                    words.extend_from_slice(emb.lookup(tok));
                }
            } else {
                locations.push(if i < span.start { BEFORE } else { AFTER });
                words.extend_from_slice(emb.lookup(tok));
            }
        }
        let mention_words = words[span.start * d..span.end * d].to_vec();
        let text = tokens[span.start..span.end].join(" ");
        let mut chars = chars::encode(&text, config.max_mention_chars, config.max_filter_width());
        if options.mask_surface {
            for c in chars.iter_mut().filter(|c| **c != chars::PAD) {
                *c = chars::UNK;
            }
        }
        Ok(Inputs {
            n_tokens: tokens.len(),
            n_mention: span.len(),
            words,
            locations,
            mention_words,
            chars,
        })
    }

    pub fn len(&self) -> usize {
        self.n_tokens
    }

    pub fn is_empty(&self) -> bool {
        self.n_tokens == 0
    }

    pub fn char_ids(&self) -> &[usize] {
        &self.chars
    }
}

/// Handles into a built forward graph.
pub(crate) struct Graph {
    pub params: Vec<Var>,
    pub context: Var,
    pub context_attention: Var,
    pub mention: Var,
    pub mention_attention: Var,
    pub logits: Var,
}

struct LstmVars {
    w_x: Var,
    w_h: Var,
    b: Var,
}

fn lstm<'a>(tape: &mut Tape<'a>, x: Var, cell: &LstmVars, hidden: usize, order: &[usize]) -> Vec<Var> {
    let xw = tape.matmul_t(x, cell.w_x);
    let xw = tape.add_row_bias(xw, cell.b);
    let mut out = vec![None; order.len()];
    let mut prev: Option<(Var, Var)> = None;
    for &pos in order {
        let mut pre = tape.row(xw, pos);
        if let Some((h_prev, _)) = prev {
            let rec = tape.matvec(cell.w_h, h_prev);
            pre = tape.add(pre, rec);
        }
        let i = tape.slice(pre, 0, hidden);
        let i = tape.sigmoid(i);
        let o = tape.slice(pre, 2 * hidden, hidden);
        let o = tape.sigmoid(o);
        let g = tape.slice(pre, 3 * hidden, hidden);
        let g = tape.tanh(g);
        let mut c = tape.mul(i, g);
        if let Some((_, c_prev)) = prev {
            let f = tape.slice(pre, hidden, hidden);
            let f = tape.sigmoid(f);
            let keep = tape.mul(f, c_prev);
            c = tape.add(c, keep);
        }
        let tc = tape.tanh(c);
        let h = tape.mul(o, tc);
        out[pos] = Some(h);
        prev = Some((h, c));
    }
    out.into_iter().map(|h| h.expect("every position visited")).collect()
}

/// `softmax_i(v · relu(W x_i))` over the rows of `rows`; returns (weights, weighted sum).
fn attend<'a>(tape: &mut Tape<'a>, rows: Var, w: Var, v: Var) -> (Var, Var) {
    let hidden = tape.matmul_t(rows, w);
    let hidden = tape.relu(hidden);
    let scores = tape.matvec(hidden, v);
    let a = tape.softmax(scores);
    let sum = tape.row_weighted_sum(rows, a);
    (a, sum)
}

pub(crate) fn forward<'a>(
    tape: &mut Tape<'a>,
    params: &'a ModelParams,
    inputs: &'a Inputs,
    config: &ModelConfig,
) -> Graph {
    let vars: Vec<Var> = params
        .tensors()
        .into_iter()
        .map(|t| tape.param(t.data(), t.rows(), t.cols()))
        .collect();
    let location = vars[0];
    let fwd = LstmVars {
        w_x: vars[1],
        w_h: vars[2],
        b: vars[3],
    };
    let bwd = LstmVars {
        w_x: vars[4],
        w_h: vars[5],
        b: vars[6],
    };
    let (ctx_w, ctx_v, men_w, men_v) = (vars[7], vars[8], vars[9], vars[10]);
    let char_emb = vars[11];
    let label_w = vars[vars.len() - 1];

    let t = inputs.n_tokens;
    let d = config.word_dim;
    let h = config.lstm_hidden;

    let words = tape.constant(Cow::Borrowed(&inputs.words), t, d);
    let locs = tape.gather(location, &inputs.locations);
    let rows: Vec<Var> = (0..t)
        .map(|i| {
            let w = tape.row(words, i);
            let l = tape.row(locs, i);
            tape.concat(&[w, l])
        })
        .collect();
    let x = tape.stack_rows(&rows);

    let forward_order: Vec<usize> = (0..t).collect();
    let backward_order: Vec<usize> = (0..t).rev().collect();
    let hf = lstm(tape, x, &fwd, h, &forward_order);
    let hb = lstm(tape, x, &bwd, h, &backward_order);
    let states: Vec<Var> = hf.iter().zip(&hb).map(|(&f, &b)| tape.concat(&[f, b])).collect();
    let states = tape.stack_rows(&states);
    let (context_attention, context) = attend(tape, states, ctx_w, ctx_v);

    let chars = tape.gather(char_emb, &inputs.chars);
    let mut parts = vec![context];
    for (k, filter) in params.char_filters.iter().enumerate() {
        let (w, b) = (vars[12 + 2 * k], vars[13 + 2 * k]);
        let windows = tape.unfold(chars, filter.width);
        let z = tape.matmul_t(windows, w);
        let z = tape.add_row_bias(z, b);
        let z = tape.relu(z);
        parts.push(tape.max_rows(z));
    }
    let mention_words = tape.constant(Cow::Borrowed(&inputs.mention_words), inputs.n_mention, d);
    let (mention_attention, mention_sum) = attend(tape, mention_words, men_w, men_v);
    parts.push(mention_sum);
    let mention = tape.concat(&parts[1..]);
    let repr = tape.concat(&parts);
    let logits = tape.matvec(label_w, repr);
    Graph {
        params: vars,
        context,
        context_attention,
        mention,
        mention_attention,
        logits,
    }
}

/// Multi-hot target over the vocabulary; unknown labels are an error.
pub fn target_vector<'l>(labels: impl IntoIterator<Item = &'l String>, vocab: &TypeVocabulary) -> Result<Vec<f64>> {
    let mut t = vec![0.0; vocab.len()];
    for label in labels {
        let id = vocab
            .id(label)
            .ok_or_else(|| Error::validation(format!("label `{label}` is not in the vocabulary")))?;
        t[id] = 1.0;
    }
    Ok(t)
}

/// Entries whose bin contains at least one positive target.
pub fn bin_mask(targets: &[f64], vocab: &TypeVocabulary) -> Vec<bool> {
    let mut mask = vec![false; targets.len()];
    for bin in Granularity::ALL {
        let range = vocab.range(bin);
        if targets[range.clone()].iter().any(|&t| t > 0.0) {
            mask[range].fill(true);
        }
    }
    mask
}

/// Bin-masked loss on precomputed scores.
pub fn loss(scores: &[f64], targets: &[f64], vocab: &TypeVocabulary) -> f64 {
    super::tape::masked_bce(scores, targets, &bin_mask(targets, vocab))
}

/// Thresholded label ids, or the lowest-id argmax when none clears the threshold.
pub fn decode(scores: &[f64]) -> Vec<usize> {
    let above: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > THRESHOLD).collect();
    if !above.is_empty() || scores.is_empty() {
        return above;
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    vec![best]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub scores: Vec<f64>,
    pub predicted: Vec<usize>,
}

impl Prediction {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let predicted = decode(&scores);
        Prediction { scores, predicted }
    }

    pub fn labels<'v>(&self, vocab: &'v TypeVocabulary) -> Vec<&'v str> {
        self.predicted.iter().map(|&i| vocab.label(i)).collect()
    }
}

/// `σ(W_t r)` followed by decoding.
pub fn predict(r: &[f64], params: &ModelParams) -> Result<Prediction> {
    let w = &params.label_weights;
    if r.len() != w.cols() {
        return Err(Error::Shape(format!(
            "representation of size {} for a {}-column label matrix",
            r.len(),
            w.cols()
        )));
    }
    let scores = (0..w.rows())
        .map(|i| sigmoid(w.row(i).iter().zip(r).map(|(a, b)| a * b).sum()))
        .collect();
    Ok(Prediction::from_scores(scores))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    pub vector: Vec<f64>,
    pub attention: Vec<f64>,
}

/// One training or scoring instance in tensor form.
#[derive(Clone, Debug)]
pub struct Instance {
    pub inputs: Inputs,
    pub targets: Vec<f64>,
    pub mask: Vec<bool>,
}

impl Instance {
    pub fn new(inputs: Inputs, targets: Vec<f64>, vocab: &TypeVocabulary) -> Self {
        let mask = bin_mask(&targets, vocab);
        Instance { inputs, targets, mask }
    }
}

/// Configuration plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

impl Model {
    pub fn new(config: ModelConfig, n_labels: usize, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let params = ModelParams::init(&config, n_labels, rng);
        Ok(Model { config, params })
    }

    pub fn n_labels(&self) -> usize {
        self.params.label_weights.rows()
    }

    pub fn check_vocab(&self, vocab: &TypeVocabulary) -> Result<()> {
        if vocab.len() != self.n_labels() {
            return Err(Error::validation(format!(
                "model has {} labels but the vocabulary has {}",
                self.n_labels(),
                vocab.len()
            )));
        }
        Ok(())
    }

    pub fn inputs(&self, tokens: &[String], span: MentionSpan, emb: &EmbeddingTable) -> Result<Inputs> {
        Inputs::new(tokens, span, emb, &self.config)
    }

    /// Attention-pooled bi-LSTM states and their weights.
    pub fn encode_context(&self, tokens: &[String], span: MentionSpan, emb: &EmbeddingTable) -> Result<Encoding> {
        let inputs = self.inputs(tokens, span, emb)?;
        let mut tape = Tape::new();
        let g = forward(&mut tape, &self.params, &inputs, &self.config);
        Ok(Encoding {
            vector: tape.value(g.context).to_vec(),
            attention: tape.value(g.context_attention).to_vec(),
        })
    }

    /// `[char-CNN; attention over mention words]` and the word-attention weights.
    pub fn encode_mention(&self, tokens: &[String], span: MentionSpan, emb: &EmbeddingTable) -> Result<Encoding> {
        let inputs = self.inputs(tokens, span, emb)?;
        let mut tape = Tape::new();
        let g = forward(&mut tape, &self.params, &inputs, &self.config);
        Ok(Encoding {
            vector: tape.value(g.mention).to_vec(),
            attention: tape.value(g.mention_attention).to_vec(),
        })
    }

    /// `r = [c; m]`.
    pub fn represent(&self, tokens: &[String], span: MentionSpan, emb: &EmbeddingTable) -> Result<Vec<f64>> {
        let inputs = self.inputs(tokens, span, emb)?;
        let mut tape = Tape::new();
        let g = forward(&mut tape, &self.params, &inputs, &self.config);
        let mut r = tape.value(g.context).to_vec();
        r.extend_from_slice(tape.value(g.mention));
        Ok(r)
    }

    pub fn scores(&self, inputs: &Inputs) -> Vec<f64> {
        let mut tape = Tape::new();
        let g = forward(&mut tape, &self.params, inputs, &self.config);
        tape.value(g.logits).iter().map(|&z| sigmoid(z)).collect()
    }

    pub fn predict_example(&self, example: &Example, emb: &EmbeddingTable) -> Result<Prediction> {
        let inputs = self.inputs(&example.tokens, example.mention, emb)?;
        Ok(Prediction::from_scores(self.scores(&inputs)))
    }

    /// Loss of one instance.
    pub fn instance_loss(&self, instance: &Instance) -> f64 {
        let mut tape = Tape::new();
        let g = forward(&mut tape, &self.params, &instance.inputs, &self.config);
        let l = tape.sigmoid_bce(g.logits, instance.targets.clone(), instance.mask.clone());
        tape.value(l)[0]
    }

    /// Loss and per-tensor gradients of one instance; `None` marks a tensor
    /// the loss does not depend on.
    pub fn instance_gradient(&self, instance: &Instance) -> (f64, Vec<Option<Vec<f64>>>) {
        let mut tape = Tape::new();
        let g = forward(&mut tape, &self.params, &instance.inputs, &self.config);
        let l = tape.sigmoid_bce(g.logits, instance.targets.clone(), instance.mask.clone());
        let mut grads = tape.backward(l);
        let loss = tape.value(l)[0];
        (loss, g.params.iter().map(|&v| grads.take(v)).collect())
    }

    /// Summed loss and gradients over a batch. Instances are evaluated in
    /// parallel and reduced in batch order, so the result does not depend on
    /// thread scheduling.
    pub fn batch_gradient(&self, batch: &[Instance]) -> (f64, Vec<Vec<f64>>) {
        use rayon::prelude::*;
        let parts: Vec<(f64, Vec<Option<Vec<f64>>>)> =
            batch.par_iter().map(|inst| self.instance_gradient(inst)).collect();
        let mut total: Vec<Vec<f64>> = self.params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        let mut loss = 0.0;
        for (l, grads) in parts {
            loss += l;
            for (acc, g) in total.iter_mut().zip(grads) {
                if let Some(g) = g {
                    for (a, b) in acc.iter_mut().zip(g) {
                        *a += b;
                    }
                }
            }
        }
        (loss, total)
    }

    pub fn batch_loss(&self, batch: &[Instance]) -> f64 {
        batch.iter().map(|inst| self.instance_loss(inst)).sum()
    }
}
