//! Flat `key = value` run configuration, merged from a file and command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ufet::model::ModelConfig;

use crate::Usage;

/// Keys naming input/output files, in addition to every model setting.
const PATH_KEYS: &[&str] = &[
    "vocab",
    "embeddings",
    "crowd",
    "head",
    "el_def",
    "el_kb",
    "checkpoint",
    "log",
    "examples",
    "gold",
    "predictions",
    "mapping",
    "conllu",
    "mentions",
    "entities",
    "candidates",
    "out",
];

fn known(key: &str) -> bool {
    PATH_KEYS.contains(&key) || ModelConfig::keys().contains(&key)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text =
            std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Usage(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if !known(key) {
                return Err(Usage(format!("line {}: unknown key `{key}`", i + 1)).into());
            }
            if cfg.values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Usage(format!("line {}: duplicate key `{key}`", i + 1)).into());
            }
        }
        Ok(cfg)
    }

    /// Command-line override; replaces any value from the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !known(key) {
            return Err(Usage(format!("unknown setting `{key}`")).into());
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Applies `key=value` strings from `--set`.
    pub fn set_all(&mut self, pairs: &[String]) -> Result<()> {
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Usage(format!("`--set {pair}`: expected key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `flag` if given, else the configured value.
    pub fn path(&self, flag: &Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.clone().or_else(|| self.get(key).map(PathBuf::from))
    }

    pub fn require_path(&self, flag: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.path(flag, key).ok_or_else(|| {
            Usage(format!(
                "missing `{key}`: pass --{} or set it in --config",
                key.replace('_', "-")
            ))
            .into()
        })
    }

    /// Model settings layered over the defaults.
    pub fn model_config(&self) -> Result<ModelConfig> {
        let mut cfg = ModelConfig::default();
        for (k, v) in &self.values {
            if ModelConfig::keys().contains(&k.as_str()) {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fails with a usage error unless every path exists.
pub fn check_inputs<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(Usage(format!("input file {} does not exist", p.display())).into());
        }
    }
    Ok(())
}
