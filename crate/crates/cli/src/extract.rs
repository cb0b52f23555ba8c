use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use ufet::corpus::{read_conllu, read_examples, read_jsonl, write_examples, Example};
use ufet::supervision::pipeline::{
    definition_examples, head_examples, kb_examples, link_examples, ontology_examples, CandidateRecord, Counts,
    EntityRecord, MentionRecord,
};
use ufet::supervision::{sample_audit, AuditRow, RelationNames, SupervisionRecord};
use ufet::typespace::{OntologyMapping, TypeVocabulary};

use crate::config::{check_inputs, RunConfig};
use crate::output::write_output;
use crate::{note, Common, Usage};

#[derive(Args)]
pub struct HeadsArgs {
    #[arg(long)]
    conllu: Option<PathBuf>,
    /// JSONL sidecar of `{"sent", "start", "end"}` mention spans.
    #[arg(long)]
    mentions: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Args)]
pub struct DefsArgs {
    #[arg(long)]
    conllu: Option<PathBuf>,
    /// JSONL sidecar with one record per (entity, definition sentence).
    #[arg(long)]
    entities: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long, default_value = "cop")]
    copula_rel: String,
    #[arg(long, default_value = "appos")]
    appos_rel: String,
    #[arg(long, default_value = "conj")]
    conj_rel: String,
}

#[derive(Args)]
pub struct LinkArgs {
    /// JSONL of `{"mention", "head", "entity", "types", "tokens", "span"}`.
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Args)]
pub struct MapArgs {
    #[arg(long)]
    examples: Option<PathBuf>,
    /// `noun<TAB>/ontology/path` lines.
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Rewrite noun labels to ontology paths instead of the reverse.
    #[arg(long)]
    to_ontology: bool,
}

#[derive(Args)]
pub struct AuditArgs {
    /// Distant-supervision example files (head, el_def, el_kb sources).
    #[arg(long = "examples", required = true, num_args = 1..)]
    examples: Vec<PathBuf>,
    #[arg(long, default_value_t = 100)]
    per_source: usize,
}

fn emit(common: &Common, examples: &[Example], counts: Counts) -> Result<()> {
    write_output(common.out.as_deref(), |w| Ok(write_examples(w, examples)?))?;
    note(common, counts);
    Ok(())
}

fn load_vocab(path: &Path) -> Result<TypeVocabulary> {
    Ok(TypeVocabulary::read(path)?)
}

pub fn heads(args: HeadsArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let conllu = cfg.require_path(&args.conllu, "conllu")?;
    let mentions = cfg.require_path(&args.mentions, "mentions")?;
    let vocab = cfg.require_path(&args.vocab, "vocab")?;
    check_inputs([conllu.as_path(), mentions.as_path(), vocab.as_path()])?;
    let vocab = load_vocab(&vocab)?;
    let sentences = read_conllu(&conllu)?;
    let records: Vec<MentionRecord> = read_jsonl(&mentions)?;
    let (examples, counts) = head_examples(&sentences, &records, &vocab)?;
    emit(common, &examples, counts)
}

pub fn defs(args: DefsArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let conllu = cfg.require_path(&args.conllu, "conllu")?;
    let entities = cfg.require_path(&args.entities, "entities")?;
    let vocab = cfg.require_path(&args.vocab, "vocab")?;
    check_inputs([conllu.as_path(), entities.as_path(), vocab.as_path()])?;
    let vocab = load_vocab(&vocab)?;
    let sentences = read_conllu(&conllu)?;
    let records: Vec<EntityRecord> = read_jsonl(&entities)?;
    let relations = RelationNames {
        copula: args.copula_rel,
        appositive: args.appos_rel,
        conjunct: args.conj_rel,
    };
    let (examples, counts) = definition_examples(&sentences, &records, &vocab, &relations)?;
    emit(common, &examples, counts)
}

pub fn link(args: LinkArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let candidates = cfg.require_path(&args.candidates, "candidates")?;
    let vocab = cfg.require_path(&args.vocab, "vocab")?;
    check_inputs([candidates.as_path(), vocab.as_path()])?;
    let vocab = load_vocab(&vocab)?;
    let records: Vec<CandidateRecord> = read_jsonl(&candidates)?;
    let (examples, counts) = link_examples(&records, &vocab)?;
    emit(common, &examples, counts)
}

pub fn map_kb(args: MapArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    let examples = cfg.require_path(&args.examples, "examples")?;
    let mapping = cfg.require_path(&args.mapping, "mapping")?;
    check_inputs([examples.as_path(), mapping.as_path()])?;
    let mapping = OntologyMapping::read(&mapping)?;
    let input = read_examples(&examples)?;
    let (out, counts) = if args.to_ontology {
        ontology_examples(&input, &mapping)
    } else {
        let vocab = cfg.require_path(&args.vocab, "vocab")?;
        check_inputs([vocab.as_path()])?;
        kb_examples(&input, &mapping, &load_vocab(&vocab)?)
    };
    emit(common, &out, counts)
}

pub fn audit(args: AuditArgs, common: &Common, cfg: &RunConfig) -> Result<()> {
    check_inputs(args.examples.iter().map(PathBuf::as_path))?;
    let seed = match cfg.get("seed") {
        Some(s) => s.parse().map_err(|_| Usage(format!("invalid seed `{s}`")))?,
        None => 1,
    };
    let mut records = Vec::new();
    for path in &args.examples {
        for ex in read_examples(path)? {
            records.push(SupervisionRecord::new(ex, None)?);
        }
    }
    let sample = sample_audit(&records, args.per_source, seed)?;
    write_output(common.out.as_deref(), |w| {
        for r in &sample {
            writeln!(w, "{}", serde_json::to_string(&AuditRow::from(r))?)?;
        }
        Ok(())
    })?;
    note(common, format!("{} of {} records sampled", sample.len(), records.len()));
    Ok(())
}
