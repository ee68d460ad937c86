use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::KindSet;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub k: usize,
    /// Margin of the sigmoid loss.
    pub gamma: f64,
    pub lr: f64,
    /// Negatives drawn per positive.
    pub neg_rate: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adversarial_temperature: f64,
    /// Weight of the alignment loss relative to the triplet loss.
    pub align_weight: f64,
    pub enabled_kinds: KindSet,
    pub seed: u64,
    /// Reserved for the mixture-bias distance term; must stay `false`.
    pub mixture_bias: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 200,
            gamma: 0.01,
            lr: 0.01,
            neg_rate: 5,
            epochs: 1000,
            batch_size: 512,
            adversarial_temperature: 1.0,
            align_weight: 1.0,
            enabled_kinds: KindSet::ALL,
            seed: 0,
            mixture_bias: false,
        }
    }
}

const KEYS: [&str; 11] = [
    "k",
    "gamma",
    "lr",
    "neg_rate",
    "epochs",
    "batch_size",
    "adversarial_temperature",
    "align_weight",
    "enabled_kinds",
    "seed",
    "mixture_bias",
];

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.neg_rate == 0 {
            return bad("neg_rate must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !self.adversarial_temperature.is_finite() || self.adversarial_temperature < 0.0 {
            return bad("adversarial_temperature must be finite and non-negative");
        }
        if !(self.align_weight >= 0.0 && self.align_weight.is_finite()) {
            return bad("align_weight must be finite and non-negative");
        }
        if self.mixture_bias {
            return bad("mixture_bias is not supported");
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
        }
        match key {
            "k" => self.k = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "neg_rate" => self.neg_rate = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "adversarial_temperature" => self.adversarial_temperature = num(key, value)?,
            "align_weight" => self.align_weight = num(key, value)?,
            "enabled_kinds" => self.enabled_kinds = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "mixture_bias" => self.mixture_bias = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses UTF-8 `key = value` lines over the defaults. `#` starts a
    /// comment line; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Renders every key in a form [`parse`](Self::parse) reads back exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = match key {
                "k" => self.k.to_string(),
                "gamma" => format!("{:?}", self.gamma),
                "lr" => format!("{:?}", self.lr),
                "neg_rate" => self.neg_rate.to_string(),
                "epochs" => self.epochs.to_string(),
                "batch_size" => self.batch_size.to_string(),
                "adversarial_temperature" => format!("{:?}", self.adversarial_temperature),
                "align_weight" => format!("{:?}", self.align_weight),
                "enabled_kinds" => self.enabled_kinds.to_string(),
                "seed" => self.seed.to_string(),
                "mixture_bias" => self.mixture_bias.to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}
