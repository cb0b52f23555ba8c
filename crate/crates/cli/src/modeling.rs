use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use ufet::corpus::{read_embeddings, read_examples, Example, Source};
use ufet::eval::{macro_prf, strict_accuracy, PredictionRecord};
use ufet::model::{checkpoint, gradcheck, load_checkpoint, Model};
use ufet::typespace::TypeVocabulary;

use crate::config::{check_inputs, RunConfig};
use crate::output::{write_bytes, write_output};
use crate::{note, Common, Usage};

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    crowd: Option<PathBuf>,
    #[arg(long)]
    head: Option<PathBuf>,
    #[arg(long)]
    el_def: Option<PathBuf>,
    #[arg(long)]
    el_kb: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Training log (TSV); defaults to the checkpoint path plus `.log.tsv`.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Model setting override, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    examples: Option<PathBuf>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// Number of random models to check.
    #[arg(long, default_value_t = 5)]
    cases: usize,
    /// Largest acceptable relative error.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

fn predicted_sets(
    model: &Model,
    examples: &[Example],
    emb: &ufet::corpus::EmbeddingTable,
    vocab: &TypeVocabulary,
) -> Result<Vec<BTreeSet<String>>> {
    examples
        .iter()
        .map(|ex| {
            let p = model.predict_example(ex, emb)?;
            Ok(p.labels(vocab).into_iter().map(String::from).collect())
        })
        .collect()
}

pub fn train(args: TrainArgs, common: &Common, mut cfg: RunConfig) -> Result<()> {
    cfg.set_all(&args.set)?;
    if let Some(n) = args.iterations {
        cfg.set("iterations", n.to_string())?;
    }
    let model_cfg = cfg.model_config()?;

    let source_paths: Vec<(Source, PathBuf)> = [
        (Source::Crowd, cfg.path(&args.crowd, "crowd")),
        (Source::Head, cfg.path(&args.head, "head")),
        (Source::ElDef, cfg.path(&args.el_def, "el_def")),
        (Source::ElKb, cfg.path(&args.el_kb, "el_kb")),
    ]
    .into_iter()
    .filter_map(|(s, p)| p.map(|p| (s, p)))
    .collect();
    if source_paths.is_empty() {
        return Err(Usage("no training data: pass at least one of --crowd, --head, --el-def, --el-kb".into()).into());
    }
    let vocab_path = cfg.require_path(&args.vocab, "vocab")?;
    let emb_path = cfg.require_path(&args.embeddings, "embeddings")?;
    let ckpt_path = common
        .out
        .clone()
        .or_else(|| cfg.get("checkpoint").map(PathBuf::from))
        .ok_or_else(|| Usage("missing checkpoint destination: pass --out".into()))?;
    let log_path = cfg.path(&args.log, "log").unwrap_or_else(|| {
        let mut p = ckpt_path.clone().into_os_string();
        p.push(".log.tsv");
        PathBuf::from(p)
    });
    check_inputs(
        source_paths
            .iter()
            .map(|(_, p)| p.as_path())
            .chain([vocab_path.as_path(), emb_path.as_path()]),
    )?;

    let vocab = TypeVocabulary::read(&vocab_path)?;
    let emb = read_embeddings(&emb_path, model_cfg.word_dim)?;
    let mut sources: BTreeMap<Source, Vec<Example>> = BTreeMap::new();
    for (source, path) in &source_paths {
        let mut examples = read_examples(path)?;
        for ex in &mut examples {
            if ex.source != *source {
                log::warn!(
                    "{}: example `{}` is tagged {} but loaded as {source}",
                    path.display(),
                    ex.id,
                    ex.source
                );
            }
            ex.source = *source;
        }
        sources.entry(*source).or_default().extend(examples);
    }

    let every = (model_cfg.iterations / 10).max(1);
    let (model, log) = ufet::model::train(&sources, &model_cfg, &vocab, &emb, &mut |r| {
        if r.iteration % every == 0 || r.iteration == model_cfg.iterations {
            log::info!("iteration {} loss {:.4} ({:.1}s)", r.iteration, r.loss, r.seconds);
        }
    })?;

    write_bytes(&ckpt_path, &checkpoint::encode(&model, &vocab)?)?;
    write_output(Some(&log_path), |w| Ok(w.write_all(log.to_tsv().as_bytes())?))?;

    let all: Vec<Example> = sources.into_values().flatten().collect();
    let predicted = predicted_sets(&model, &all, &emb, &vocab)?;
    let pairs: Vec<_> = predicted
        .into_iter()
        .zip(all.iter().map(|e| e.labels.clone()))
        .collect();
    let prf = macro_prf(&pairs)?;
    let acc = strict_accuracy(&pairs)?;
    note(
        common,
        format!(
            "trained {} iterations on {} examples; train macro F1 {:.4}, strict accuracy {:.4}",
            model_cfg.iterations,
            all.len(),
            prf.f1,
            acc
        ),
    );
    Ok(())
}

pub fn predict(args: PredictArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let ckpt = cfg.require_path(&args.checkpoint, "checkpoint")?;
    let vocab_path = cfg.require_path(&args.vocab, "vocab")?;
    let emb_path = cfg.require_path(&args.embeddings, "embeddings")?;
    let examples_path = cfg.require_path(&args.examples, "examples")?;
    check_inputs([
        ckpt.as_path(),
        vocab_path.as_path(),
        emb_path.as_path(),
        examples_path.as_path(),
    ])?;

    let vocab = TypeVocabulary::read(&vocab_path)?;
    let model = load_checkpoint(&ckpt, &vocab)?;
    let emb = read_embeddings(&emb_path, model.config.word_dim)?;
    let examples = read_examples(&examples_path)?;
    let records: Vec<PredictionRecord> = examples
        .iter()
        .map(|ex| {
            let p = model.predict_example(ex, &emb)?;
            Ok(PredictionRecord {
                id: ex.id.clone(),
                predicted: p.labels(&vocab).into_iter().map(String::from).collect(),
                scores: Some(p.scores),
            })
        })
        .collect::<Result<_>>()?;
    write_output(common.out.as_deref(), |w| {
        for r in &records {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        Ok(())
    })?;
    note(common, format!("{} predictions", records.len()));
    Ok(())
}

pub fn gradcheck(args: GradcheckArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let seed = match cfg.get("seed") {
        Some(s) => s.parse().map_err(|_| Usage(format!("invalid seed `{s}`")))?,
        None => 1,
    };
    let results = gradcheck::run(args.cases, seed)?;
    let mut worst: f64 = 0.0;
    let mut lines = String::new();
    for (i, (cfg, checks)) in results.iter().enumerate() {
        lines.push_str(&format!(
            "case {}: word_dim={} location_dim={} lstm_hidden={} attention_hidden={} char_dim={} widths={:?} filters={}\n",
            i + 1,
            cfg.word_dim,
            cfg.location_dim,
            cfg.lstm_hidden,
            cfg.attention_hidden,
            cfg.char_dim,
            cfg.char_filter_widths,
            cfg.char_filters_per_width
        ));
        for c in checks {
            lines.push_str(&format!("  {:<24} {:>6} {:.3e}\n", c.name, c.elements, c.max_rel_error));
            worst = worst.max(c.max_rel_error);
        }
    }
    lines.push_str(&format!(
        "max relative error {worst:.3e} (tolerance {:.0e})\n",
        args.tolerance
    ));
    write_output(common.out.as_deref(), |w| Ok(w.write_all(lines.as_bytes())?))?;
    if worst.is_nan() || worst >= args.tolerance {
        bail!("gradient check failed: max relative error {worst:.3e}");
    }
    Ok(())
}
