//! TOML run configuration. Every section and key is optional; command-line
//! flags override whatever the file sets.

use std::path::Path;

use anyhow::{Context, Result};
use framestamp::model::{LossKind, TrainConfig};
use framestamp::synth::GenConfig;
use framestamp::ClassWeight;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gen: GenConfig,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub bench: BenchSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub loss: LossKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub interp_coefficient: f64,
    pub seed: u64,
    pub class_weight: ClassWeight,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// 0 trains the linear head.
    pub hidden_dim: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            loss: t.loss_kind,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: t.batch_size,
            interp_coefficient: t.interp_coefficient,
            seed: t.seed,
            class_weight: t.class_weight,
            weight_decay: t.weight_decay,
            beta1: t.beta1,
            beta2: t.beta2,
            hidden_dim: 0,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            loss_kind: self.loss,
            interp_coefficient: self.interp_coefficient,
            seed: self.seed,
            class_weight: self.class_weight,
            beta1: self.beta1,
            beta2: self.beta2,
            weight_decay: self.weight_decay,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Seconds.
    pub tolerances: Vec<f64>,
    /// `none`, `count`, or `time:<edges in seconds>`.
    pub stratify: String,
    pub format: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            tolerances: vec![0.02, 0.04, 0.1],
            stratify: "none".into(),
            format: "json".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub frames: Vec<usize>,
    pub timestamps: usize,
    pub chars_per_timestamp: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Shape of the randomly initialized scorer used when no model is given.
    /// The default has a hidden layer: a linear 16-dim scorer is cheaper per
    /// pass than posterior-mode extraction itself, which no decoder is.
    pub feature_dim: usize,
    pub hidden_dim: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            frames: vec![1000, 8000],
            timestamps: 25,
            chars_per_timestamp: 10,
            repeats: 5,
            seed: 0,
            feature_dim: 16,
            hidden_dim: 16,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("in config {}", p.display()))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}
