//! The network's forward pass checked against a loop-by-loop reimplementation.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ufet::corpus::{EmbeddingTable, MentionSpan};
use ufet::model::{LstmParams, Model, ModelConfig, Tensor};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(m: &Tensor, x: &[f64]) -> Vec<f64> {
    (0..m.rows()).map(|r| dot(m.row(r), x)).collect()
}

fn lstm(p: &LstmParams, xs: &[Vec<f64>], order: impl Iterator<Item = usize>) -> Vec<Vec<f64>> {
    let h = p.w_h.cols();
    let mut out = vec![Vec::new(); xs.len()];
    let (mut hp, mut cp) = (vec![0.0; h], vec![0.0; h]);
    for t in order {
        let wx = matvec(&p.w_x, &xs[t]);
        let wh = matvec(&p.w_h, &hp);
        let pre: Vec<f64> = (0..4 * h).map(|k| wx[k] + wh[k] + p.b.data()[k]).collect();
        let mut hn = vec![0.0; h];
        let mut cn = vec![0.0; h];
        for k in 0..h {
            let i = sigmoid(pre[k]);
            let f = sigmoid(pre[h + k]);
            let o = sigmoid(pre[2 * h + k]);
            let g = pre[3 * h + k].tanh();
            cn[k] = f * cp[k] + i * g;
            hn[k] = o * cn[k].tanh();
        }
        out[t] = hn.clone();
        hp = hn;
        cp = cn;
    }
    out
}

fn attention(w: &Tensor, v: &Tensor, rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let e: Vec<f64> = rows
        .iter()
        .map(|x| {
            let hidden: Vec<f64> = matvec(w, x).into_iter().map(|z| z.max(0.0)).collect();
            dot(v.data(), &hidden)
        })
        .collect();
    let top = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = e.iter().map(|z| (z - top).exp()).collect();
    let total: f64 = exp.iter().sum();
    let a: Vec<f64> = exp.iter().map(|z| z / total).collect();
    let mut sum = vec![0.0; rows[0].len()];
    for (x, ai) in rows.iter().zip(&a) {
        for (s, xi) in sum.iter_mut().zip(x) {
            *s += ai * xi;
        }
    }
    (a, sum)
}

fn char_ids(text: &str, max_chars: usize, min_len: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = text
        .chars()
        .take(max_chars)
        .map(|c| if (' '..='~').contains(&c) { c as usize - 32 } else { 95 })
        .collect();
    while ids.len() < min_len {
        ids.push(96);
    }
    ids
}

struct Oracle {
    context: Vec<f64>,
    context_attention: Vec<f64>,
    mention: Vec<f64>,
    mention_attention: Vec<f64>,
    scores: Vec<f64>,
}

fn oracle(model: &Model, tokens: &[String], span: MentionSpan, emb: &EmbeddingTable) -> Oracle {
    let p = &model.params;
    let cfg = &model.config;
    let xs: Vec<Vec<f64>> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let loc = if i < span.start {
                0
            } else if i < span.end {
                1
            } else {
                2
            };
            let mut x = emb.lookup(t).to_vec();
            x.extend_from_slice(p.location.row(loc));
            x
        })
        .collect();
    let n = xs.len();
    let hf = lstm(&p.lstm_fwd, &xs, 0..n);
    let hb = lstm(&p.lstm_bwd, &xs, (0..n).rev());
    let states: Vec<Vec<f64>> = hf
        .iter()
        .zip(&hb)
        .map(|(f, b)| [f.as_slice(), b.as_slice()].concat())
        .collect();
    let (context_attention, context) = attention(&p.context_attention.w, &p.context_attention.v, &states);

    let text = tokens[span.start..span.end].join(" ");
    let ids = char_ids(&text, cfg.max_mention_chars, cfg.max_filter_width());
    let mut mention = Vec::new();
    for f in &p.char_filters {
        for k in 0..f.w.rows() {
            let mut best = f64::NEG_INFINITY;
            for start in 0..=ids.len() - f.width {
                let window: Vec<f64> = ids[start..start + f.width]
                    .iter()
                    .flat_map(|&c| p.char_embeddings.row(c).to_vec())
                    .collect();
                let z = (dot(f.w.row(k), &window) + f.b.data()[k]).max(0.0);
                best = best.max(z);
            }
            mention.push(best);
        }
    }
    let words: Vec<Vec<f64>> = tokens[span.start..span.end]
        .iter()
        .map(|t| emb.lookup(t).to_vec())
        .collect();
    let (mention_attention, word_sum) = attention(&p.mention_attention.w, &p.mention_attention.v, &words);
    mention.extend(word_sum);

    let r = [context.as_slice(), mention.as_slice()].concat();
    let scores = matvec(&p.label_weights, &r).into_iter().map(sigmoid).collect();
    Oracle {
        context,
        context_attention,
        mention,
        mention_attention,
        scores,
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

const WORDS: &[&str] = &["the", "Swiss", "tennis", "player", "won", "Wimbledon", "é", "?"];

fn random_case(seed: u64) -> (Model, Vec<String>, MentionSpan, EmbeddingTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = ModelConfig {
        word_dim: rng.random_range(1..=5),
        location_dim: rng.random_range(1..=4),
        lstm_hidden: rng.random_range(1..=5),
        attention_hidden: rng.random_range(1..=4),
        char_dim: rng.random_range(1..=4),
        char_filter_widths: if rng.random_bool(0.5) { vec![2] } else { vec![1, 3] },
        char_filters_per_width: rng.random_range(1..=3),
        max_mention_chars: rng.random_range(2..=20),
        ..ModelConfig::default()
    };
    let emb = EmbeddingTable::from_pairs(
        config.word_dim,
        WORDS[..6].iter().map(|w| {
            (
                w.to_lowercase(),
                (0..config.word_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
        }),
    )
    .unwrap();
    let n = rng.random_range(1..=7);
    let tokens: Vec<String> = (0..n)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
        .collect();
    let start = rng.random_range(0..n);
    let end = rng.random_range(start + 1..=n);
    let model = Model::new(config, rng.random_range(1..=6), &mut rng).unwrap();
    (model, tokens, MentionSpan { start, end }, emb)
}

#[test]
fn two_token_hand_set_weights() {
    let config = ModelConfig {
        word_dim: 1,
        location_dim: 1,
        lstm_hidden: 1,
        attention_hidden: 1,
        char_dim: 1,
        char_filter_widths: vec![1],
        char_filters_per_width: 1,
        ..ModelConfig::default()
    };
    let mut model = Model::new(config, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let p = &mut model.params;
    p.location = Tensor::from_vec(&[3, 1], vec![0.0, 1.0, 0.0]);
    for cell in [&mut p.lstm_fwd, &mut p.lstm_bwd] {
        cell.w_x = Tensor::from_vec(&[4, 2], vec![0.0; 8]);
        cell.w_h = Tensor::from_vec(&[4, 1], vec![0.0; 4]);
        // Gates open at 0.5; candidate tanh(x · 1).
        cell.w_x.row_mut(3)[0] = 1.0;
        cell.b = Tensor::from_vec(&[4], vec![0.0; 4]);
    }
    p.context_attention.w = Tensor::from_vec(&[1, 2], vec![0.0, 0.0]);
    let emb = EmbeddingTable::from_pairs(1, [("a", vec![1.0]), ("b", vec![-1.0])]).unwrap();
    let tokens = vec!["a".to_string(), "b".to_string()];
    let enc = model
        .encode_context(&tokens, MentionSpan { start: 0, end: 1 }, &emb)
        .unwrap();

    // Forward direction: c1 = 0.5·tanh(1), h1 = 0.5·tanh(c1); c2 = 0.5·c1 + 0.5·tanh(-1).
    let c1 = 0.5 * 1f64.tanh();
    let hf1 = 0.5 * c1.tanh();
    let c2 = 0.5 * c1 + 0.5 * (-1f64).tanh();
    let hf2 = 0.5 * c2.tanh();
    // Backward direction visits b then a.
    let d2 = 0.5 * (-1f64).tanh();
    let hb2 = 0.5 * d2.tanh();
    let d1 = 0.5 * d2 + 0.5 * 1f64.tanh();
    let hb1 = 0.5 * d1.tanh();
    // Zero attention weights give uniform attention.
    assert!(close(&enc.attention, &[0.5, 0.5]));
    assert!(
        close(&enc.vector, &[(hf1 + hf2) / 2.0, (hb1 + hb2) / 2.0]),
        "{:?}",
        enc.vector
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_matches_oracle(seed in any::<u64>()) {
        let (model, tokens, span, emb) = random_case(seed);
        let want = oracle(&model, &tokens, span, &emb);
        let ctx = model.encode_context(&tokens, span, &emb).unwrap();
        let men = model.encode_mention(&tokens, span, &emb).unwrap();
        let scores = model.scores(&model.inputs(&tokens, span, &emb).unwrap());
        prop_assert!(close(&ctx.vector, &want.context), "{:?} vs {:?}", ctx.vector, want.context);
        prop_assert!(close(&ctx.attention, &want.context_attention));
        prop_assert!(close(&men.vector, &want.mention), "{:?} vs {:?}", men.vector, want.mention);
        prop_assert!(close(&men.attention, &want.mention_attention));
        prop_assert!(close(&scores, &want.scores));
    }

    #[test]
    fn attention_is_a_distribution(seed in any::<u64>()) {
        let (model, tokens, span, emb) = random_case(seed);
        let ctx = model.encode_context(&tokens, span, &emb).unwrap();
        let men = model.encode_mention(&tokens, span, &emb).unwrap();
        prop_assert_eq!(ctx.attention.len(), tokens.len());
        prop_assert_eq!(men.attention.len(), span.len());
        for a in [&ctx.attention, &men.attention] {
            prop_assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
