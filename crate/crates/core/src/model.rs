//! Per-frame scorer, its training loop, and JSON checkpoints.
//!
//! The scorer is a frame-local projection head: either a linear map
//! `score = w·d + b` or one tanh hidden layer `score = v·tanh(W·d + c) + b`.
//! It sees one frame at a time, so shifting the input sequence shifts the
//! output scores by the same amount.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{self, ScoredExample};
use crate::inference::{self, HeadKind};
use crate::losses::{self, ClassWeight, FrameScores, LossResult};
use crate::par::Exec;
use crate::synth::{Example, FrameFeatures, Split, TrainingSet};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    pub feature_dim: usize,
    /// 0 selects the linear head.
    pub hidden_dim: usize,
    pub head_kind: HeadKind,
}

impl ScorerConfig {
    pub fn linear(feature_dim: usize, head_kind: HeadKind) -> Self {
        Self {
            feature_dim,
            hidden_dim: 0,
            head_kind,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 {
            return Err(Error::Config("feature_dim must be at least 1".into()));
        }
        Ok(())
    }
}

/// Weight arrays. For the linear head `w1` is `1 × feature_dim` and `b1` has
/// one entry; with a hidden layer `w1` is `hidden × feature_dim`, `b1` has
/// `hidden` entries, `w2` is `1 × hidden` and `b2` has one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerModel {
    config: ScorerConfig,
    weights: Weights,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    config: ScorerConfig,
    seed: u64,
    weights: Weights,
    format_version: u32,
}

impl ScorerModel {
    /// All-zero weights: every frame scores 0.
    pub fn zeros(config: ScorerConfig) -> Result<Self> {
        config.validate()?;
        let d = config.feature_dim;
        let h = config.hidden_dim;
        let weights = if h == 0 {
            Weights {
                w1: vec![vec![0.0; d]],
                b1: vec![0.0],
                w2: None,
                b2: None,
            }
        } else {
            Weights {
                w1: vec![vec![0.0; d]; h],
                b1: vec![0.0; h],
                w2: Some(vec![vec![0.0; h]]),
                b2: Some(vec![0.0]),
            }
        };
        Ok(Self {
            config,
            weights,
            seed: 0,
        })
    }

    /// Small Gaussian initialization, deterministic in `seed`.
    pub fn init(config: ScorerConfig, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        model.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.feature_dim as f64;
        let mut normal = |scale: f64| scale * rng.sample::<f64, _>(StandardNormal);
        if config.hidden_dim == 0 {
            for w in &mut model.weights.w1[0] {
                *w = normal(0.1 / d.sqrt());
            }
        } else {
            for row in &mut model.weights.w1 {
                for w in row {
                    *w = normal(1.0 / d.sqrt());
                }
            }
            let h = config.hidden_dim as f64;
            for w in &mut model.weights.w2.as_mut().expect("hidden head")[0] {
                *w = normal(1.0 / h.sqrt());
            }
        }
        Ok(model)
    }

    pub fn from_parts(config: ScorerConfig, weights: Weights, seed: u64) -> Result<Self> {
        config.validate()?;
        let model = Self {
            config,
            weights,
            seed,
        };
        model.check_shapes()?;
        Ok(model)
    }

    fn check_shapes(&self) -> Result<()> {
        let d = self.config.feature_dim;
        let h = self.config.hidden_dim;
        let w = &self.weights;
        let rows = if h == 0 { 1 } else { h };
        let mut problems = Vec::new();
        if w.w1.len() != rows || w.w1.iter().any(|r| r.len() != d) {
            problems.push(format!("w1 must be {rows}x{d}"));
        }
        if w.b1.len() != rows {
            problems.push(format!("b1 must have {rows} entries"));
        }
        if h == 0 {
            if w.w2.is_some() || w.b2.is_some() {
                problems.push("linear head must not carry w2/b2".into());
            }
        } else {
            match &w.w2 {
                Some(w2) if w2.len() == 1 && w2[0].len() == h => {}
                _ => problems.push(format!("w2 must be 1x{h}")),
            }
            match &w.b2 {
                Some(b2) if b2.len() == 1 => {}
                _ => problems.push("b2 must have 1 entry".into()),
            }
        }
        if !problems.is_empty() {
            return Err(Error::Shape(problems.join("; ")));
        }
        if self.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("weights must be finite".into()));
        }
        Ok(())
    }

    pub fn config(&self) -> ScorerConfig {
        self.config
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_params(&self) -> usize {
        let d = self.config.feature_dim;
        match self.config.hidden_dim {
            0 => d + 1,
            h => h * d + h + h + 1,
        }
    }

    /// Flat parameter vector: `w1` rows, `b1`, then `w2`, `b2` if present.
    pub fn params(&self) -> Vec<f64> {
        let w = &self.weights;
        let mut out = Vec::with_capacity(self.num_params());
        for row in &w.w1 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&w.b1);
        if let (Some(w2), Some(b2)) = (&w.w2, &w.b2) {
            out.extend_from_slice(&w2[0]);
            out.extend_from_slice(b2);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut it = params.iter().copied();
        let w = &mut self.weights;
        for row in &mut w.w1 {
            for v in row {
                *v = it.next().unwrap();
            }
        }
        for v in &mut w.b1 {
            *v = it.next().unwrap();
        }
        if let (Some(w2), Some(b2)) = (&mut w.w2, &mut w.b2) {
            for v in &mut w2[0] {
                *v = it.next().unwrap();
            }
            for v in b2 {
                *v = it.next().unwrap();
            }
        }
        Ok(())
    }

    fn check_input(&self, features: &FrameFeatures) -> Result<()> {
        if features.feature_dim() != self.config.feature_dim {
            return Err(Error::Shape(format!(
                "model expects feature_dim {}, input has {}",
                self.config.feature_dim,
                features.feature_dim()
            )));
        }
        Ok(())
    }

    fn score_row(&self, row: &[f64], hidden: &mut [f64]) -> f64 {
        let w = &self.weights;
        if self.config.hidden_dim == 0 {
            return dot(&w.w1[0], row) + w.b1[0];
        }
        for ((h, wr), b) in hidden.iter_mut().zip(&w.w1).zip(&w.b1) {
            *h = (dot(wr, row) + b).tanh();
        }
        let w2 = &w.w2.as_ref().expect("hidden head")[0];
        dot(w2, hidden) + w.b2.as_ref().expect("hidden head")[0]
    }

    /// Applies the head to every frame independently.
    pub fn score_frames(&self, features: &FrameFeatures) -> Result<FrameScores> {
        self.check_input(features)?;
        let mut hidden = vec![0.0; self.config.hidden_dim];
        let values = features
            .rows()
            .map(|row| self.score_row(row, &mut hidden))
            .collect();
        FrameScores::new(values, features.grid())
    }

    /// Gradient of a loss with respect to the flat parameters, given the
    /// loss gradient with respect to each frame score.
    pub fn param_gradient(&self, features: &FrameFeatures, score_grad: &[f64]) -> Result<Vec<f64>> {
        self.check_input(features)?;
        if score_grad.len() != features.num_frames() {
            return Err(Error::Shape(format!(
                "{} score gradients for {} frames",
                score_grad.len(),
                features.num_frames()
            )));
        }
        let d = self.config.feature_dim;
        let h = self.config.hidden_dim;
        let mut grad = vec![0.0; self.num_params()];
        if h == 0 {
            for (row, &g) in features.rows().zip(score_grad) {
                for (acc, x) in grad[..d].iter_mut().zip(row) {
                    *acc += g * x;
                }
                grad[d] += g;
            }
            return Ok(grad);
        }
        let w = &self.weights;
        let w2 = &w.w2.as_ref().expect("hidden head")[0];
        let (gw1, rest) = grad.split_at_mut(h * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        let mut hidden = vec![0.0; h];
        for (row, &g) in features.rows().zip(score_grad) {
            if g == 0.0 {
                continue;
            }
            for ((a, wr), b) in hidden.iter_mut().zip(&w.w1).zip(&w.b1) {
                *a = (dot(wr, row) + b).tanh();
            }
            gb2[0] += g;
            for j in 0..h {
                gw2[j] += g * hidden[j];
                let da = g * w2[j] * (1.0 - hidden[j] * hidden[j]);
                gb1[j] += da;
                for (acc, x) in gw1[j * d..(j + 1) * d].iter_mut().zip(row) {
                    *acc += da * x;
                }
            }
        }
        Ok(grad)
    }

    pub fn to_json(&self) -> String {
        let ck = Checkpoint {
            config: self.config,
            seed: self.seed,
            weights: self.weights.clone(),
            format_version: CHECKPOINT_FORMAT_VERSION,
        };
        serde_json::to_string_pretty(&ck).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if ck.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported checkpoint format_version {}",
                ck.format_version
            )));
        }
        Self::from_parts(ck.config, ck.weights, ck.seed)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn save_model(path: &Path, model: &ScorerModel) -> Result<()> {
    std::fs::write(path, model.to_json())?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ScorerModel> {
    ScorerModel::from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Binary,
    Poisson,
    /// Binary frame loss plus `interp_coefficient` times the Poisson loss.
    Interp,
}

impl LossKind {
    /// Head used for extraction after training with this loss.
    pub fn head(self) -> HeadKind {
        match self {
            LossKind::Binary => HeadKind::Binary,
            LossKind::Poisson | LossKind::Interp => HeadKind::Poisson,
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(LossKind::Binary),
            "poisson" => Ok(LossKind::Poisson),
            "interp" => Ok(LossKind::Interp),
            other => Err(Error::Config(format!(
                "unknown loss {other:?}; expected binary, poisson or interp"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss_kind: LossKind,
    pub interp_coefficient: f64,
    pub seed: u64,
    pub class_weight: ClassWeight,
    pub beta1: f64,
    pub beta2: f64,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 10,
            batch_size: 8,
            loss_kind: LossKind::Poisson,
            interp_coefficient: 0.05,
            seed: 0,
            class_weight: ClassWeight::Auto,
            beta1: 0.9,
            beta2: 0.999,
            weight_decay: 0.01,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Config("learning_rate must be nonnegative".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.interp_coefficient.is_finite() && self.interp_coefficient >= 0.0) {
            return Err(Error::Config(
                "interp_coefficient must be nonnegative".into(),
            ));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::Config("weight_decay must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Adam with decoupled weight decay.
#[derive(Debug, Clone)]
struct AdamW {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl AdamW {
    fn new(cfg: &TrainConfig, n: usize) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: 1e-8,
            weight_decay: cfg.weight_decay,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * *p);
        }
    }
}

/// Loss of one example and its gradient with respect to the frame scores.
pub fn example_loss(
    scores: &FrameScores,
    example: &Example,
    config: &TrainConfig,
) -> Result<LossResult> {
    match config.loss_kind {
        LossKind::Binary => losses::binary_loss(scores, &example.labels, config.class_weight),
        LossKind::Poisson => losses::poisson_nll(scores, &example.labels),
        LossKind::Interp => {
            let frame = losses::binary_loss(scores, &example.labels, config.class_weight)?;
            let poisson = losses::poisson_nll(scores, &example.labels)?;
            losses::interpolated_loss(&frame, &poisson, config.interp_coefficient)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean per-example training loss over the epoch's batches.
    pub train_loss: f64,
    pub dev_accuracy: Option<f64>,
    pub dev_mad_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ScorerModel,
    pub history: Vec<EpochMetrics>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
}

/// Scores every example and extracts as many timestamps as it has labels.
pub fn predict_examples<'a, I>(
    model: &ScorerModel,
    examples: I,
    exec: Exec,
) -> Result<Vec<ScoredExample>>
where
    I: IntoIterator<Item = &'a Example>,
{
    let list: Vec<&Example> = examples.into_iter().collect();
    let head = model.config().head_kind;
    exec.try_map(&list, |ex| {
        let scores = model.score_frames(&ex.features)?;
        let preds = inference::extract(&scores, head, ex.labels.count())?;
        Ok(ScoredExample {
            id: ex.id.clone(),
            predicted_s: preds.iter().map(|p| p.time_s).collect(),
            truth_s: ex.labels.times_s().to_vec(),
        })
    })
}

/// Trains with mini-batch AdamW on the `train` split and keeps the epoch with
/// the best one-frame-tolerance accuracy on the `dev` split (the last epoch
/// when there is no dev data). Runs single-threaded.
pub fn train(
    config: &TrainConfig,
    scorer: ScorerConfig,
    dataset: &TrainingSet,
) -> Result<TrainOutcome> {
    config.validate()?;
    scorer.validate()?;
    if scorer.head_kind != config.loss_kind.head() {
        return Err(Error::Config(format!(
            "loss {:?} trains a {:?} head, scorer is configured as {:?}",
            config.loss_kind,
            config.loss_kind.head(),
            scorer.head_kind
        )));
    }
    let train_set: Vec<&Example> = dataset.split(Split::Train).collect();
    if train_set.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    if let Some(ex) = train_set
        .iter()
        .find(|ex| ex.features.feature_dim() != scorer.feature_dim)
    {
        return Err(Error::Shape(format!(
            "example {} has feature_dim {}, scorer expects {}",
            ex.id,
            ex.features.feature_dim(),
            scorer.feature_dim
        )));
    }
    let dev_set: Vec<&Example> = dataset.split(Split::Dev).collect();
    let tolerance = train_set[0].features.grid().frame_duration_s();

    let mut model = ScorerModel::init(scorer, config.seed)?;
    let mut params = model.params();
    let mut opt = AdamW::new(config, params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, f64, usize, ScorerModel)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = vec![0.0; params.len()];
            for &j in batch {
                let ex = train_set[j];
                let scores = model.score_frames(&ex.features)?;
                let loss = example_loss(&scores, ex, config)?;
                if !loss.value.is_finite() {
                    return Err(Error::Diverged(format!(
                        "epoch {epoch}, example {}: loss = {}",
                        ex.id, loss.value
                    )));
                }
                loss_sum += loss.value;
                let g = model.param_gradient(&ex.features, &loss.gradient)?;
                for (acc, v) in grad.iter_mut().zip(&g) {
                    *acc += v;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            opt.update(&mut params, &grad);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Diverged(format!(
                    "epoch {epoch}: non-finite weights"
                )));
            }
            model.set_params(&params)?;
        }

        let mut metrics = EpochMetrics {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            dev_accuracy: None,
            dev_mad_s: None,
        };
        if !dev_set.is_empty() {
            let scored = predict_examples(&model, dev_set.iter().copied(), Exec::Sequential)?;
            let report = eval::score(&scored, &[tolerance])?;
            let acc = report.accuracy_at(tolerance).unwrap_or(0.0);
            metrics.dev_accuracy = Some(acc);
            metrics.dev_mad_s = Some(report.mad_s);
            let better = match &best {
                None => true,
                Some((a, m, _, _)) => acc > *a || (acc == *a && report.mad_s <= *m),
            };
            if better {
                best = Some((acc, report.mad_s, epoch, model.clone()));
            }
        }
        history.push(metrics);
    }

    let (model, best_epoch) = match best {
        Some((_, _, epoch, m)) => (m, epoch),
        None => (model, config.epochs),
    };
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
    })
}
