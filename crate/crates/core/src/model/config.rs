use crate::error::{Error, Result};

/// Decision threshold on sigmoid scores.
pub const THRESHOLD: f64 = 0.5;

/// Architecture and training settings. Defaults are sized for CPU training on
/// small corpora.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub location_dim: usize,
    /// Hidden size per LSTM direction.
    pub lstm_hidden: usize,
    pub attention_hidden: usize,
    pub char_dim: usize,
    pub char_filter_widths: Vec<usize>,
    pub char_filters_per_width: usize,
    pub max_mention_chars: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    /// Examples drawn from every source at every iteration.
    pub batch_size: usize,
    pub iterations: usize,
    /// Word dropout on mention tokens of head-word examples; 0 disables it.
    pub head_dropout: f64,
    /// Replace the mention surface of head-word examples by unknown tokens.
    pub mask_mention_surface: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 50,
            location_dim: 5,
            lstm_hidden: 50,
            attention_hidden: 50,
            char_dim: 16,
            char_filter_widths: vec![2, 3, 4],
            char_filters_per_width: 16,
            max_mention_chars: 50,
            learning_rate: 0.01,
            clip_norm: 5.0,
            batch_size: 10,
            iterations: 1000,
            head_dropout: 0.5,
            mask_mention_surface: false,
            seed: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "word_dim",
    "location_dim",
    "lstm_hidden",
    "attention_hidden",
    "char_dim",
    "char_filter_widths",
    "char_filters_per_width",
    "max_mention_chars",
    "learning_rate",
    "clip_norm",
    "batch_size",
    "iterations",
    "head_dropout",
    "mask_mention_surface",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("invalid value `{value}` for `{key}`")))
}

impl ModelConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Char-CNN output size.
    pub fn char_out_dim(&self) -> usize {
        self.char_filter_widths.len() * self.char_filters_per_width
    }

    pub fn mention_dim(&self) -> usize {
        self.char_out_dim() + self.word_dim
    }

    pub fn context_dim(&self) -> usize {
        2 * self.lstm_hidden
    }

    pub fn repr_dim(&self) -> usize {
        self.context_dim() + self.mention_dim()
    }

    pub fn max_filter_width(&self) -> usize {
        self.char_filter_widths.iter().copied().max().unwrap_or(1)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "word_dim" => self.word_dim = parse(key, value)?,
            "location_dim" => self.location_dim = parse(key, value)?,
            "lstm_hidden" => self.lstm_hidden = parse(key, value)?,
            "attention_hidden" => self.attention_hidden = parse(key, value)?,
            "char_dim" => self.char_dim = parse(key, value)?,
            "char_filter_widths" => {
                self.char_filter_widths = value.split(',').map(|w| parse(key, w)).collect::<Result<_>>()?
            }
            "char_filters_per_width" => self.char_filters_per_width = parse(key, value)?,
            "max_mention_chars" => self.max_mention_chars = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "clip_norm" => self.clip_norm = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "head_dropout" => self.head_dropout = parse(key, value)?,
            "mask_mention_surface" => self.mask_mention_surface = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(Error::validation(format!("unknown model setting `{key}`"))),
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let widths = self
            .char_filter_widths
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("word_dim", self.word_dim.to_string()),
            ("location_dim", self.location_dim.to_string()),
            ("lstm_hidden", self.lstm_hidden.to_string()),
            ("attention_hidden", self.attention_hidden.to_string()),
            ("char_dim", self.char_dim.to_string()),
            ("char_filter_widths", widths),
            ("char_filters_per_width", self.char_filters_per_width.to_string()),
            ("max_mention_chars", self.max_mention_chars.to_string()),
            // `{:?}` prints the shortest string that parses back to the same f64.
            ("learning_rate", format!("{:?}", self.learning_rate)),
            ("clip_norm", format!("{:?}", self.clip_norm)),
            ("batch_size", self.batch_size.to_string()),
            ("iterations", self.iterations.to_string()),
            ("head_dropout", format!("{:?}", self.head_dropout)),
            ("mask_mention_surface", self.mask_mention_surface.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("bad config line `{line}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("word_dim", self.word_dim),
            ("location_dim", self.location_dim),
            ("lstm_hidden", self.lstm_hidden),
            ("attention_hidden", self.attention_hidden),
            ("char_dim", self.char_dim),
            ("char_filters_per_width", self.char_filters_per_width),
            ("max_mention_chars", self.max_mention_chars),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::validation(format!("`{name}` must be at least 1")));
            }
        }
        if self.char_filter_widths.is_empty() || self.char_filter_widths.contains(&0) {
            return Err(Error::validation(
                "`char_filter_widths` must be a list of positive widths",
            ));
        }
        let mut widths = self.char_filter_widths.clone();
        widths.sort_unstable();
        widths.dedup();
        if widths.len() != self.char_filter_widths.len() {
            return Err(Error::validation("`char_filter_widths` must not repeat a width"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::validation("`learning_rate` must be positive"));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::validation("`clip_norm` must be positive"));
        }
        if !(0.0..1.0).contains(&self.head_dropout) {
            return Err(Error::validation("`head_dropout` must be in [0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_dims() {
        let c = ModelConfig::default();
        assert_eq!(c.mention_dim(), 3 * 16 + 50);
        assert_eq!(c.repr_dim(), 2 * c.lstm_hidden + c.mention_dim());
    }

    #[test]
    fn text_round_trip() {
        let c = ModelConfig {
            learning_rate: 0.1 + 0.2,
            char_filter_widths: vec![1, 5],
            mask_mention_surface: true,
            ..ModelConfig::default()
        };
        assert_eq!(ModelConfig::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(ModelConfig::from_text("hidden = 3").is_err());
        assert!(ModelConfig::from_text("word_dim = 0").is_err());
        assert!(ModelConfig::from_text("word_dim = x").is_err());
        assert!(ModelConfig::from_text("head_dropout = 1.0").is_err());
        assert!(ModelConfig::from_text("char_filter_widths = 2,0").is_err());
        assert!(ModelConfig::from_text("char_filter_widths = 2,2").is_err());
    }
}
