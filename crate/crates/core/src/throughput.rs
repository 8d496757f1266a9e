//! Cost comparison between single-pass frame extraction and a simulated
//! autoregressive baseline that re-runs the scorer once per emitted character.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{self, HeadKind};
use crate::model::ScorerModel;
use crate::spline::FrameGrid;
use crate::synth::FrameFeatures;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub frames: Vec<usize>,
    pub timestamps: usize,
    pub chars_per_timestamp: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            frames: vec![1000, 8000],
            timestamps: 25,
            chars_per_timestamp: 10,
            repeats: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub num_frames: usize,
    pub num_timestamps: usize,
    pub single_pass_invocations: usize,
    pub baseline_invocations: usize,
    /// Fastest of the repeats, in seconds.
    pub single_pass_s: f64,
    pub baseline_s: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftCheck {
    pub shift_frames: usize,
    pub max_abs_diff: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Single-pass time at the largest frame count over the smallest.
    pub frame_scaling_ratio: Option<f64>,
    pub frame_count_ratio: Option<f64>,
    pub shift_equivariance: ShiftCheck,
}

/// Random Gaussian frame features, deterministic in `seed`.
pub fn random_features(num_frames: usize, feature_dim: usize, seed: u64) -> Result<FrameFeatures> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..num_frames * feature_dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    FrameFeatures::new(data, feature_dim, FrameGrid::with_frames(num_frames)?, 0)
}

/// Compares scores of a delayed input with delayed scores of the original.
pub fn shift_equivariance(
    model: &ScorerModel,
    features: &FrameFeatures,
    shift: usize,
) -> Result<ShiftCheck> {
    let t = features.num_frames();
    if shift >= t {
        return Err(Error::InvalidValue(format!(
            "shift {shift} must be below {t} frames"
        )));
    }
    let base = model.score_frames(features)?;
    let moved = model.score_frames(&features.shifted(shift))?;
    let max_abs_diff = moved.values()[shift..]
        .iter()
        .zip(&base.values()[..t - shift])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ShiftCheck {
        shift_frames: shift,
        max_abs_diff,
        passed: max_abs_diff == 0.0,
    })
}

fn single_pass(model: &ScorerModel, features: &FrameFeatures, n: usize) -> Result<usize> {
    let scores = model.score_frames(features)?;
    let preds = inference::extract(&scores, HeadKind::Poisson, n)?;
    black_box(&preds);
    Ok(1)
}

fn autoregressive(model: &ScorerModel, features: &FrameFeatures, steps: usize) -> Result<usize> {
    for _ in 0..steps {
        let scores = model.score_frames(features)?;
        // "emit" one character from the pass
        let best =
            scores
                .values()
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
                );
        black_box(best);
    }
    Ok(steps)
}

fn fastest<F: FnMut() -> Result<usize>>(repeats: usize, mut f: F) -> Result<(f64, usize)> {
    let mut best = f64::INFINITY;
    let mut count = 0;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        count = f()?;
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok((best, count))
}

pub fn run_bench(model: &ScorerModel, config: &BenchConfig) -> Result<BenchReport> {
    if config.frames.is_empty() || config.frames.contains(&0) {
        return Err(Error::Config("frame counts must be positive".into()));
    }
    if config.timestamps == 0 || config.chars_per_timestamp == 0 {
        return Err(Error::Config(
            "timestamps and chars_per_timestamp must be positive".into(),
        ));
    }
    let dim = model.config().feature_dim;
    let mut rows = Vec::with_capacity(config.frames.len());
    for (j, &frames) in config.frames.iter().enumerate() {
        let features = random_features(frames, dim, config.seed.wrapping_add(j as u64))?;
        let n = config.timestamps;
        let steps = n * config.chars_per_timestamp;
        let (single_s, single_calls) =
            fastest(config.repeats, || single_pass(model, &features, n))?;
        let (base_s, base_calls) =
            fastest(config.repeats, || autoregressive(model, &features, steps))?;
        rows.push(BenchRow {
            num_frames: frames,
            num_timestamps: n,
            single_pass_invocations: single_calls,
            baseline_invocations: base_calls,
            single_pass_s: single_s,
            baseline_s: base_s,
            speedup: base_s / single_s,
        });
    }
    let (min_row, max_row) = (
        rows.iter().min_by_key(|r| r.num_frames),
        rows.iter().max_by_key(|r| r.num_frames),
    );
    let (frame_scaling_ratio, frame_count_ratio) = match (min_row, max_row) {
        (Some(a), Some(b)) if b.num_frames > a.num_frames => (
            Some(b.single_pass_s / a.single_pass_s),
            Some(b.num_frames as f64 / a.num_frames as f64),
        ),
        _ => (None, None),
    };
    let probe = random_features(256, dim, config.seed ^ 0x5eed)?;
    let shift_equivariance = shift_equivariance(model, &probe, 37)?;
    Ok(BenchReport {
        rows,
        frame_scaling_ratio,
        frame_count_ratio,
        shift_equivariance,
    })
}
