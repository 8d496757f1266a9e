//! Timestamp extraction from trained frame scores.
//!
//! The binary head reports the top-k frames at their midpoints. The Poisson
//! head maps event times through the cumulative hazard: given `n` events, the
//! rescaled `i`-th time `Λ(t_i)` is a scaled Beta(i, n+1-i) order statistic, so
//! the marginal density of `t_i` is
//!
//! ```text
//! p(t) ∝ Λ(t)^(i-1) · (Λ(T) - Λ(t))^(n-i) · λ(t)
//! ```
//!
//! Within a frame `λ` is constant and the Beta factor is unimodal in `Λ`, so the
//! maximum over `[0, T]` is found among the frame knots and the point where
//! `Λ(t) = Λ(T)·(i-1)/(n-1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::FrameScores;
use crate::par::Exec;
use crate::spline::{CumulativeHazard, FrameGrid, IntensityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimestampPrediction {
    /// 1-based position among the extracted events.
    pub event_index: usize,
    pub time_frames: f64,
    pub time_s: f64,
    /// 0-based frame containing `time_frames`.
    pub frame_index: usize,
}

impl TimestampPrediction {
    pub fn at(grid: FrameGrid, event_index: usize, time_frames: f64) -> Self {
        Self {
            event_index,
            time_frames,
            time_s: grid.frames_to_seconds(time_frames),
            frame_index: grid.frame_of(time_frames),
        }
    }
}

/// Which head produced the scores, and therefore how to read them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Binary,
    Poisson,
}

/// Top-`k` frames by score, reported at frame midpoints and sorted by time.
/// Equal scores prefer the lower frame index.
pub fn binary_extract(scores: &FrameScores, k: usize) -> Result<Vec<TimestampPrediction>> {
    let t = scores.len();
    if k == 0 || k > t {
        return Err(Error::Domain(format!("k = {k} outside [1, {t}]")));
    }
    let values = scores.values();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    let grid = scores.grid();
    Ok(chosen
        .into_iter()
        .enumerate()
        .map(|(i, frame)| TimestampPrediction::at(grid, i + 1, grid.frame_midpoint(frame)))
        .collect())
}

/// Marginal density of the `i`-th of `n` event times.
#[derive(Debug, Clone)]
pub struct PosteriorDensity {
    profile: IntensityProfile,
    hazard: CumulativeHazard,
    n: usize,
    i: usize,
}

impl PosteriorDensity {
    pub fn new(profile: IntensityProfile, n: usize, i: usize) -> Result<Self> {
        if n == 0 || i == 0 || i > n {
            return Err(Error::Domain(format!(
                "event index {i} of {n} must satisfy 1 <= i <= n"
            )));
        }
        let hazard = profile.build_cumulative();
        Ok(Self {
            profile,
            hazard,
            n,
            i,
        })
    }

    pub fn profile(&self) -> &IntensityProfile {
        &self.profile
    }

    pub fn hazard(&self) -> &CumulativeHazard {
        &self.hazard
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn i(&self) -> usize {
        self.i
    }
}

/// `a·ln x` with the convention `0·ln 0 = 0`.
fn weighted_log(exponent: usize, x: f64) -> f64 {
    if exponent == 0 {
        0.0
    } else if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        exponent as f64 * x.ln()
    }
}

/// Unnormalized log-density of the `i`-th event time at `t ∈ [0, T]`.
///
/// `λ(t)` follows the half-open frame convention, with `t = T` read from the
/// last frame. Returns `-inf` where a positive-exponent factor vanishes.
pub fn posterior_log_density(density: &PosteriorDensity, t: f64) -> Result<f64> {
    let z = density.hazard.eval(t)?;
    let rate = density.profile.rates()[density.profile.grid().frame_of(t)];
    Ok(beta_log(density.n, density.i, z, density.hazard.total()) + rate.ln())
}

fn beta_log(n: usize, i: usize, z: f64, total: f64) -> f64 {
    weighted_log(i - 1, z) + weighted_log(n - i, total - z)
}

/// Logs at every knot, shared across event indices.
struct KnotLogs {
    log_h: Vec<f64>,
    log_rest: Vec<f64>,
    log_rate: Vec<f64>,
}

impl KnotLogs {
    fn new(profile: &IntensityProfile, hazard: &CumulativeHazard) -> Self {
        let total = hazard.total();
        let safe_ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        Self {
            log_h: hazard.knots().iter().map(|&h| safe_ln(h)).collect(),
            log_rest: hazard.knots().iter().map(|&h| safe_ln(total - h)).collect(),
            log_rate: profile.rates().iter().map(|r| r.ln()).collect(),
        }
    }

    /// Log-density at knot `j` using the rate of frame `k` (one-sided limit).
    fn at_knot(&self, n: usize, i: usize, j: usize, k: usize) -> f64 {
        let a = i - 1;
        let b = n - i;
        let left = if a == 0 {
            0.0
        } else {
            a as f64 * self.log_h[j]
        };
        let right = if b == 0 {
            0.0
        } else {
            b as f64 * self.log_rest[j]
        };
        left + right + self.log_rate[k]
    }
}

fn argmax_rate_frame(profile: &IntensityProfile) -> usize {
    let mut best = 0;
    for (k, &r) in profile.rates().iter().enumerate() {
        if r > profile.rates()[best] {
            best = k;
        }
    }
    best
}

fn mode_time(
    profile: &IntensityProfile,
    hazard: &CumulativeHazard,
    logs: &KnotLogs,
    n: usize,
    i: usize,
) -> f64 {
    if n == 1 {
        return profile.grid().frame_midpoint(argmax_rate_frame(profile));
    }
    let total = hazard.total();
    let knots = hazard.knots();

    // Interior Beta mode only exists when both exponents are positive.
    let interior = if i > 1 && i < n {
        let z_star = total * (i - 1) as f64 / (n - 1) as f64;
        hazard.invert(z_star).ok().map(|t| {
            let k = profile.grid().frame_of(t);
            (t, k, beta_log(n, i, z_star, total) + logs.log_rate[k])
        })
    } else {
        None
    };

    let mut best_t = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    let mut offer = |t: f64, v: f64| {
        if v > best_v || (v == best_v && t < best_t) {
            best_t = t;
            best_v = v;
        }
    };
    for k in 0..profile.num_frames() {
        offer(k as f64, logs.at_knot(n, i, k, k));
        if let Some((t, frame, v)) = interior {
            if frame == k && knots[k] <= knots[k + 1] {
                offer(t, v);
            }
        }
        offer((k + 1) as f64, logs.at_knot(n, i, k + 1, k));
    }
    best_t
}

/// Posterior mode of the `i`-th event time.
pub fn posterior_mode(density: &PosteriorDensity) -> TimestampPrediction {
    let logs = KnotLogs::new(&density.profile, &density.hazard);
    let t = mode_time(
        &density.profile,
        &density.hazard,
        &logs,
        density.n,
        density.i,
    );
    TimestampPrediction::at(density.profile.grid(), density.i, t)
}

/// Posterior modes for every index `i = 1..=n`.
pub fn posterior_modes_all(
    profile: &IntensityProfile,
    n: usize,
) -> Result<Vec<TimestampPrediction>> {
    if n == 0 {
        return Err(Error::Domain("event count must be at least 1".into()));
    }
    let hazard = profile.build_cumulative();
    let logs = KnotLogs::new(profile, &hazard);
    let grid = profile.grid();
    Ok((1..=n)
        .map(|i| TimestampPrediction::at(grid, i, mode_time(profile, &hazard, &logs, n, i)))
        .collect())
}

/// Brute-force mode: scans `{step, 2·step, …} ∪ {0, 1, …, T}` and returns the
/// earliest maximizer of [`posterior_log_density`].
pub fn grid_oracle_mode(density: &PosteriorDensity, step: f64) -> Result<TimestampPrediction> {
    if !(step > 0.0 && step <= 0.01) {
        return Err(Error::InvalidValue(format!(
            "oracle step must be in (0, 0.01], got {step}"
        )));
    }
    let span = density.profile.grid().span();
    let mut best_t = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    let mut consider = |t: f64| -> Result<()> {
        let v = posterior_log_density(density, t)?;
        if v > best_v || (v == best_v && t < best_t) {
            best_t = t;
            best_v = v;
        }
        Ok(())
    };
    for k in 0..=density.profile.num_frames() {
        consider(k as f64)?;
    }
    let mut j = 1usize;
    loop {
        let t = j as f64 * step;
        if t >= span {
            break;
        }
        consider(t)?;
        j += 1;
    }
    Ok(TimestampPrediction::at(
        density.profile.grid(),
        density.i,
        best_t,
    ))
}

/// One realization of the process on `[0, T]` by thinning a homogeneous
/// process at rate `max λ_k`. Deterministic for a given seed.
pub fn sample_ihp(profile: &IntensityProfile, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates = profile.rates();
    let lambda_max = rates.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let gaps = Exp::new(lambda_max).expect("positive dominating rate");
    let span = profile.grid().span();
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += gaps.sample(&mut rng);
        if t >= span {
            break;
        }
        let rate = rates[profile.grid().frame_of(t)];
        if rng.random::<f64>() * lambda_max < rate {
            out.push(t);
        }
    }
    out
}

/// Realizations for seeds `first_seed..first_seed + count`.
pub fn sample_ihp_many(
    profile: &IntensityProfile,
    first_seed: u64,
    count: usize,
    exec: Exec,
) -> Vec<Vec<f64>> {
    exec.map_range(count, |j| sample_ihp(profile, first_seed + j as u64))
}

/// Extracts `count` timestamps from raw head scores.
pub fn extract(
    scores: &FrameScores,
    head: HeadKind,
    count: usize,
) -> Result<Vec<TimestampPrediction>> {
    match head {
        HeadKind::Binary => binary_extract(scores, count),
        HeadKind::Poisson => {
            let profile = IntensityProfile::from_log_rates(scores.values(), scores.grid())?;
            posterior_modes_all(&profile, count)
        }
    }
}
