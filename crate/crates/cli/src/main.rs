//! `ufet`: mine typing supervision, train the typer, predict and score.

mod config;
mod extract;
mod modeling;
mod output;
mod scoring;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// A usage or validation problem in the command line or its inputs (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "ufet", version, about = "Entity typing with free-form noun-phrase labels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice the command makes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when omitted, where that makes sense).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Label mentions with their in-vocabulary head word and head phrase.
    ExtractHeads(extract::HeadsArgs),
    /// Mine "is-a" types from definition sentences of linked entities.
    ExtractDefs(extract::DefsArgs),
    /// Apply the conservative linking filter and keep in-vocabulary KB types.
    LinkFilter(extract::LinkArgs),
    /// Map between ontology paths and vocabulary nouns.
    MapKb(extract::MapArgs),
    /// Train a model on up to four supervision sources.
    Train(modeling::TrainArgs),
    /// Score examples with a trained model.
    Predict(modeling::PredictArgs),
    /// Score predictions against gold examples.
    Eval(scoring::EvalArgs),
    /// Label coverage curve of an example file.
    Stats(scoring::StatsArgs),
    /// Sample distant-supervision examples per source for manual checking.
    AuditSample(extract::AuditArgs),
    /// Compare analytic and finite-difference gradients on small random models.
    Gradcheck(modeling::GradcheckArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<ufet::Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(cli.common.config.as_deref())?;
    if let Some(seed) = cli.common.seed {
        cfg.set("seed", seed.to_string())?;
    }
    let common = &cli.common;
    match cli.command {
        Command::ExtractHeads(a) => extract::heads(a, common, &cfg),
        Command::ExtractDefs(a) => extract::defs(a, common, &cfg),
        Command::LinkFilter(a) => extract::link(a, common, &cfg),
        Command::MapKb(a) => extract::map_kb(a, common, &cfg),
        Command::Train(a) => modeling::train(a, common, cfg),
        Command::Predict(a) => modeling::predict(a, common, &cfg),
        Command::Eval(a) => scoring::eval(a, common, &cfg),
        Command::Stats(a) => scoring::stats(a, common, &cfg),
        Command::AuditSample(a) => extract::audit(a, common, &cfg),
        Command::Gradcheck(a) => modeling::gradcheck(a, common, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Progress line on stderr unless `--quiet`.
pub fn note(common: &Common, msg: impl fmt::Display) {
    if !common.quiet {
        eprintln!("{msg}");
    }
}
