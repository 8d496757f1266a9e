//! Frame grid conventions and the piecewise-constant intensity spline.
//!
//! All spline math runs in frame units on the domain `[0, T]`; frame `k`
//! (0-based) covers the half-open interval `[k, k + 1)`. A time exactly equal
//! to `T` belongs to the last frame. Conversion to seconds only happens at I/O
//! boundaries through [`FrameGrid`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds per frame used by the reference audio front end (one frame per 40 ms).
pub const DEFAULT_FRAME_DURATION_S: f64 = 0.04;

/// Log-intensities are clamped to this range before exponentiation.
pub const LOG_RATE_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameGrid {
    num_frames: usize,
    frame_duration_s: f64,
}

impl FrameGrid {
    pub fn new(num_frames: usize, frame_duration_s: f64) -> Result<Self> {
        if num_frames == 0 {
            return Err(Error::InvalidValue("num_frames must be at least 1".into()));
        }
        if !(frame_duration_s.is_finite() && frame_duration_s > 0.0) {
            return Err(Error::InvalidValue(format!(
                "frame duration must be positive, got {frame_duration_s}"
            )));
        }
        Ok(Self {
            num_frames,
            frame_duration_s,
        })
    }

    /// Grid with the default 40 ms frame duration.
    pub fn with_frames(num_frames: usize) -> Result<Self> {
        Self::new(num_frames, DEFAULT_FRAME_DURATION_S)
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn frame_duration_s(&self) -> f64 {
        self.frame_duration_s
    }

    /// Length of the domain in frame units, `T`.
    pub fn span(&self) -> f64 {
        self.num_frames as f64
    }

    pub fn duration_s(&self) -> f64 {
        self.num_frames as f64 * self.frame_duration_s
    }

    pub fn frames_to_seconds(&self, t_frames: f64) -> f64 {
        t_frames * self.frame_duration_s
    }

    pub fn seconds_to_frames(&self, t_s: f64) -> f64 {
        t_s / self.frame_duration_s
    }

    /// 0-based index of the frame containing `t` (half-open frames, `T` maps
    /// to the last frame). Caller guarantees `0 <= t <= T`.
    pub fn frame_of(&self, t_frames: f64) -> usize {
        let k = t_frames.floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.num_frames - 1)
        }
    }

    pub fn frame_midpoint(&self, frame: usize) -> f64 {
        frame as f64 + 0.5
    }
}

/// Strictly positive per-frame rates `λ_1..λ_T` in frame⁻¹ units.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    rates: Vec<f64>,
    grid: FrameGrid,
}

impl IntensityProfile {
    pub fn new(rates: Vec<f64>, grid: FrameGrid) -> Result<Self> {
        if rates.len() != grid.num_frames() {
            return Err(Error::Shape(format!(
                "expected {} rates, got {}",
                grid.num_frames(),
                rates.len()
            )));
        }
        if let Some((k, r)) = rates
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r > 0.0))
        {
            return Err(Error::InvalidValue(format!(
                "rate at frame {k} must be finite and positive, got {r}"
            )));
        }
        Ok(Self { rates, grid })
    }

    /// Builds a profile from upstream log-intensities. Values are clamped to
    /// `[-LOG_RATE_CLAMP, LOG_RATE_CLAMP]` before exponentiation.
    pub fn from_log_rates(log_rates: &[f64], grid: FrameGrid) -> Result<Self> {
        if let Some(v) = log_rates.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite log-rate {v}")));
        }
        let rates = log_rates
            .iter()
            .map(|s| s.clamp(-LOG_RATE_CLAMP, LOG_RATE_CLAMP).exp())
            .collect();
        Self::new(rates, grid)
    }

    /// Convenience for tests and examples: grid with default frame duration.
    pub fn from_rates(rates: Vec<f64>) -> Result<Self> {
        let grid = FrameGrid::with_frames(rates.len())?;
        Self::new(rates, grid)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn grid(&self) -> FrameGrid {
        self.grid
    }

    pub fn num_frames(&self) -> usize {
        self.rates.len()
    }

    /// Profile with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.rates.iter().map(|r| r * factor).collect(), self.grid)
    }

    /// Rate `λ(t)` of the frame containing `t`, for `0 <= t < T`.
    pub fn eval_hazard(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.grid.span()) {
            return Err(Error::Domain(format!(
                "hazard time {t} outside [0, {})",
                self.grid.span()
            )));
        }
        Ok(self.rates[self.grid.frame_of(t)])
    }

    pub fn build_cumulative(&self) -> CumulativeHazard {
        CumulativeHazard::from_profile(self)
    }
}

/// Piecewise-linear cumulative hazard `Λ(t)` with knots `H_0 = 0, H_k = Σ_{j≤k} λ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeHazard {
    knots: Vec<f64>,
    rates: Vec<f64>,
    grid: FrameGrid,
}

impl CumulativeHazard {
    pub fn from_profile(profile: &IntensityProfile) -> Self {
        let mut knots = Vec::with_capacity(profile.num_frames() + 1);
        let mut acc = 0.0;
        knots.push(acc);
        for &r in profile.rates() {
            acc += r;
            knots.push(acc);
        }
        Self {
            knots,
            rates: profile.rates().to_vec(),
            grid: profile.grid(),
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn grid(&self) -> FrameGrid {
        self.grid
    }

    /// `Λ(T)`, the total intensity mass.
    pub fn total(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let span = self.grid.span();
        if !(t >= 0.0 && t <= span) {
            return Err(Error::Domain(format!("time {t} outside [0, {span}]")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let k = self.grid.frame_of(t);
        self.knots[k] + (t - k as f64) * self.rates[k]
    }

    /// Inverse of `Λ`: the unique `t` with `Λ(t) = z`, for `0 <= z <= Λ(T)`.
    pub fn invert(&self, z: f64) -> Result<f64> {
        let total = self.total();
        if !(z >= 0.0 && z <= total) {
            return Err(Error::Domain(format!(
                "cumulative value {z} outside [0, {total}]"
            )));
        }
        if z == total {
            return Ok(self.grid.span());
        }
        // First knot strictly greater than z, minus one, is the containing frame.
        let k = self.knots.partition_point(|&h| h <= z) - 1;
        let k = k.min(self.rates.len() - 1);
        let t = k as f64 + (z - self.knots[k]) / self.rates[k];
        Ok(t.min((k + 1) as f64))
    }
}

/// Ground-truth event times for one example, with derived per-frame marks.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLabels {
    times_frames: Vec<f64>,
    times_s: Vec<f64>,
    marks: Vec<u8>,
    grid: FrameGrid,
}

impl EventLabels {
    pub fn from_frames(grid: FrameGrid, mut times_frames: Vec<f64>) -> Result<Self> {
        let span = grid.span();
        if let Some(t) = times_frames
            .iter()
            .find(|t| !(t.is_finite() && **t >= 0.0 && **t <= span))
        {
            return Err(Error::Domain(format!("event time {t} outside [0, {span}]")));
        }
        times_frames.sort_by(f64::total_cmp);
        let times_s = times_frames
            .iter()
            .map(|&t| grid.frames_to_seconds(t))
            .collect();
        let mut marks = vec![0u8; grid.num_frames()];
        for &t in &times_frames {
            marks[grid.frame_of(t)] = 1;
        }
        Ok(Self {
            times_frames,
            times_s,
            marks,
            grid,
        })
    }

    /// Builds labels from times in seconds. Times that overshoot the clip end
    /// by rounding (within 1e-9 frames) are clamped to `T`.
    pub fn from_seconds(grid: FrameGrid, times_s: &[f64]) -> Result<Self> {
        let span = grid.span();
        let frames = times_s
            .iter()
            .map(|&s| {
                let t = grid.seconds_to_frames(s);
                if t > span && t - span <= 1e-9 * span.max(1.0) {
                    span
                } else {
                    t
                }
            })
            .collect();
        let mut labels = Self::from_frames(grid, frames)?;
        let mut sorted = times_s.to_vec();
        sorted.sort_by(f64::total_cmp);
        labels.times_s = sorted;
        Ok(labels)
    }

    pub fn times_frames(&self) -> &[f64] {
        &self.times_frames
    }

    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    /// `y_t = 1` iff at least one event falls in frame `t`.
    pub fn marks(&self) -> &[u8] {
        &self.marks
    }

    pub fn count(&self) -> usize {
        self.times_frames.len()
    }

    pub fn grid(&self) -> FrameGrid {
        self.grid
    }

    /// Number of events per frame, `m_k`.
    pub fn frame_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.grid.num_frames()];
        for &t in &self.times_frames {
            counts[self.grid.frame_of(t)] += 1;
        }
        counts
    }
}
