use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use ufet::corpus::{coverage_curve, ranked_labels, read_examples, read_jsonl};
use ufet::eval::{evaluate, PredictionRecord};
use ufet::typespace::TypeVocabulary;

use crate::config::{check_inputs, RunConfig};
use crate::output::write_output;
use crate::Common;

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Enables MRR (when predictions carry scores) and the per-bin breakdown.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Also report strict accuracy and ontology-mode F1.
    #[arg(long)]
    ontonotes: bool,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    examples: Option<PathBuf>,
    /// Only the first N ranks.
    #[arg(long)]
    top: Option<usize>,
    /// `rank,fraction` CSV instead of a table.
    #[arg(long)]
    csv: bool,
}

/// Prints the metrics table to stdout; `--out` receives the JSON report.
pub fn eval(args: EvalArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let gold_path = cfg.require_path(&args.gold, "gold")?;
    let pred_path = cfg.require_path(&args.predictions, "predictions")?;
    let vocab_path = cfg.path(&args.vocab, "vocab");
    check_inputs(
        [gold_path.as_path(), pred_path.as_path()]
            .into_iter()
            .chain(vocab_path.as_deref()),
    )?;

    let gold = read_examples(&gold_path)?;
    let preds: Vec<PredictionRecord> = read_jsonl(&pred_path)?;
    let vocab = vocab_path.map(TypeVocabulary::read).transpose()?;
    let report = evaluate(&gold, &preds, vocab.as_ref(), args.ontonotes)?;

    if let Some(out) = &common.out {
        write_output(Some(out), |w| Ok(writeln!(w, "{}", report.to_json())?))?;
    }
    if !common.quiet || common.out.is_none() {
        print!("{}", report.to_table());
    }
    Ok(())
}

pub fn stats(args: StatsArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let path = cfg.require_path(&args.examples, "examples")?;
    check_inputs([path.as_path()])?;
    let examples = read_examples(&path)?;
    let ranked = ranked_labels(&examples)?;
    let mut curve = coverage_curve(&examples)?;
    if let Some(n) = args.top {
        curve.truncate(n);
    }
    write_output(common.out.as_deref(), |w| {
        if args.csv {
            writeln!(w, "rank,fraction")?;
            for (k, f) in &curve {
                writeln!(w, "{k},{f}")?;
            }
        } else {
            writeln!(w, "{:>5} {:>9}  label", "rank", "coverage")?;
            for ((k, f), (label, _)) in curve.iter().zip(&ranked) {
                writeln!(w, "{k:>5} {:>8.1}%  {label}", f * 100.0)?;
            }
        }
        Ok(())
    })
}
