//! Synthetic temporal-grounding tasks.
//!
//! Each example is a sequence of query-conditioned frame features standing in
//! for decoder outputs, plus the ground-truth times of the queried events.
//! Every event type has a fixed unit-norm signature vector; frames around a
//! queried event carry that signature (full strength on the event frame, half
//! strength on its two neighbours) on top of Gaussian noise.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::spline::{EventLabels, FrameGrid};

/// Signal weight on the frames adjacent to an event frame.
pub const NEIGHBOR_TAPER: f64 = 0.5;

/// Row-major `T × feature_dim` matrix of per-frame features.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    data: Vec<f64>,
    feature_dim: usize,
    grid: FrameGrid,
    query_id: usize,
}

impl FrameFeatures {
    pub fn new(
        data: Vec<f64>,
        feature_dim: usize,
        grid: FrameGrid,
        query_id: usize,
    ) -> Result<Self> {
        if feature_dim == 0 {
            return Err(Error::InvalidValue("feature_dim must be at least 1".into()));
        }
        if data.len() != grid.num_frames() * feature_dim {
            return Err(Error::Shape(format!(
                "{} values for {} frames of dimension {}",
                data.len(),
                grid.num_frames(),
                feature_dim
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("feature values must be finite".into()));
        }
        Ok(Self {
            data,
            feature_dim,
            grid,
            query_id,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], grid: FrameGrid, query_id: usize) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Shape(format!(
                "frame {bad} has {} features, expected {dim}",
                rows[bad].len()
            )));
        }
        Self::new(rows.concat(), dim, grid, query_id)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.feature_dim..(t + 1) * self.feature_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.feature_dim)
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_frames(&self) -> usize {
        self.grid.num_frames()
    }

    pub fn grid(&self) -> FrameGrid {
        self.grid
    }

    pub fn query_id(&self) -> usize {
        self.query_id
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Sum of squares of each frame's feature vector.
    pub fn frame_energy(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().map(|v| v * v).sum()).collect()
    }

    /// Sequence delayed by `shift` frames: the first `shift` frames are zero
    /// and the last `shift` frames are dropped.
    pub fn shifted(&self, shift: usize) -> Self {
        let t = self.num_frames();
        let d = self.feature_dim;
        let mut data = vec![0.0; t * d];
        if shift < t {
            data[shift * d..].copy_from_slice(&self.data[..(t - shift) * d]);
        }
        Self {
            data,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub features: FrameFeatures,
    pub labels: EventLabels,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub examples: Vec<Example>,
}

impl TrainingSet {
    /// Checks that all examples share a feature dimension and frame duration.
    pub fn new(examples: Vec<Example>) -> Result<Self> {
        if let Some(first) = examples.first() {
            let dim = first.features.feature_dim();
            let dur = first.features.grid().frame_duration_s();
            for ex in &examples {
                if ex.features.feature_dim() != dim {
                    return Err(Error::Validation(format!(
                        "example {} has feature_dim {}, expected {dim}",
                        ex.id,
                        ex.features.feature_dim()
                    )));
                }
                if ex.features.grid().frame_duration_s() != dur {
                    return Err(Error::Validation(format!(
                        "example {} has frame duration {} s, expected {dur} s",
                        ex.id,
                        ex.features.grid().frame_duration_s()
                    )));
                }
            }
        }
        Ok(Self { examples })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.examples.first().map(|e| e.features.feature_dim())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Example> {
        self.examples.iter().filter(move |e| e.split == split)
    }

    /// Subset containing only the given split.
    pub fn only(&self, split: Split) -> TrainingSet {
        TrainingSet {
            examples: self.split(split).cloned().collect(),
        }
    }
}

/// Inclusive integer range; deserializes from `n` or `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RangeRepr", into = "RangeRepr")]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

impl IntRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn exactly(v: usize) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    One(usize),
    Span([usize; 2]),
}

impl From<RangeRepr> for IntRange {
    fn from(r: RangeRepr) -> Self {
        match r {
            RangeRepr::One(v) => IntRange::exactly(v),
            RangeRepr::Span([lo, hi]) => IntRange::new(lo, hi),
        }
    }
}

impl From<IntRange> for RangeRepr {
    fn from(r: IntRange) -> Self {
        if r.lo == r.hi {
            RangeRepr::One(r.lo)
        } else {
            RangeRepr::Span([r.lo, r.hi])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub num_examples: usize,
    pub duration_frames: IntRange,
    pub frame_ms: f64,
    pub feature_dim: usize,
    pub num_event_types: usize,
    pub events_per_example: IntRange,
    pub signal_amplitude: f64,
    pub noise_sigma: f64,
    /// Events are placed in `[lo, hi)` frames; defaults to the whole clip.
    pub event_time_range_frames: Option<[f64; 2]>,
    /// Minimum gap between any two events; 0 disables the check.
    pub min_separation_frames: f64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    /// Seed for the event-type signature vectors, kept separate from `seed`
    /// so train and test sets drawn with different seeds share signatures.
    pub signature_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            num_examples: 200,
            duration_frames: IntRange::exactly(250),
            frame_ms: 40.0,
            feature_dim: 16,
            num_event_types: 8,
            events_per_example: IntRange::new(1, 10),
            signal_amplitude: 1.0,
            noise_sigma: 0.05,
            event_time_range_frames: None,
            min_separation_frames: 2.0,
            dev_fraction: 0.1,
            test_fraction: 0.1,
            seed: 0,
            signature_seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.num_examples == 0 {
            return bad("num_examples must be positive".into());
        }
        if self.duration_frames.lo == 0 || self.duration_frames.lo > self.duration_frames.hi {
            return bad(format!(
                "invalid duration_frames {:?}",
                self.duration_frames
            ));
        }
        if self.events_per_example.lo == 0
            || self.events_per_example.lo > self.events_per_example.hi
        {
            return bad(format!(
                "invalid events_per_example {:?}",
                self.events_per_example
            ));
        }
        if !(self.frame_ms.is_finite() && self.frame_ms > 0.0) {
            return bad(format!("frame_ms must be positive, got {}", self.frame_ms));
        }
        if self.feature_dim == 0 || self.num_event_types == 0 {
            return bad("feature_dim and num_event_types must be positive".into());
        }
        if !(self.signal_amplitude.is_finite() && self.signal_amplitude > 0.0) {
            return bad("signal_amplitude must be positive".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be nonnegative".into());
        }
        if !(self.min_separation_frames.is_finite() && self.min_separation_frames >= 0.0) {
            return bad("min_separation_frames must be nonnegative".into());
        }
        let fractions_ok = (0.0..=1.0).contains(&self.dev_fraction)
            && (0.0..=1.0).contains(&self.test_fraction)
            && self.dev_fraction + self.test_fraction <= 1.0;
        if !fractions_ok {
            return bad("dev_fraction + test_fraction must lie in [0, 1]".into());
        }
        let [lo, hi] = self.time_range();
        if !(lo >= 0.0 && lo < hi && hi <= self.duration_frames.lo as f64) {
            return bad(format!(
                "event_time_range_frames [{lo}, {hi}] must satisfy 0 <= lo < hi <= {}",
                self.duration_frames.lo
            ));
        }
        Ok(())
    }

    pub fn time_range(&self) -> [f64; 2] {
        self.event_time_range_frames
            .unwrap_or([0.0, self.duration_frames.lo as f64])
    }

    pub fn frame_duration_s(&self) -> f64 {
        self.frame_ms / 1000.0
    }

    fn split_of(&self, index: usize) -> Split {
        let n = self.num_examples as f64;
        let n_test = (n * self.test_fraction).round() as usize;
        let n_dev = (n * self.dev_fraction).round() as usize;
        let n_train = self.num_examples.saturating_sub(n_test + n_dev);
        if index < n_train {
            Split::Train
        } else if index < n_train + n_dev {
            Split::Dev
        } else {
            Split::Test
        }
    }
}

/// Unit-norm signature vector per event type.
pub fn type_signatures(num_types: usize, feature_dim: usize, signature_seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(signature_seed);
    rng.set_stream(u64::MAX);
    (0..num_types)
        .map(|_| loop {
            let v: Vec<f64> = (0..feature_dim)
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

fn place_events(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: f64,
    hi: f64,
    min_sep: f64,
) -> Option<Vec<f64>> {
    const MAX_TRIES: usize = 1000;
    let mut times: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut placed = false;
        for _ in 0..MAX_TRIES {
            let t = rng.random_range(lo..hi);
            if times.iter().all(|&s| (s - t).abs() >= min_sep) {
                times.push(t);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(times)
}

fn generate_one(config: &GenConfig, signatures: &[Vec<f64>], index: usize) -> Result<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);

    let num_frames = rng.random_range(config.duration_frames.lo..=config.duration_frames.hi);
    let grid = FrameGrid::new(num_frames, config.frame_duration_s())?;
    let n = rng.random_range(config.events_per_example.lo..=config.events_per_example.hi);
    let [lo, hi] = config.time_range();
    let times =
        place_events(&mut rng, n, lo, hi, config.min_separation_frames).ok_or_else(|| {
            Error::Generation(format!(
                "cannot place {n} events {} frames apart in [{lo}, {hi})",
                config.min_separation_frames
            ))
        })?;
    let types: Vec<usize> = (0..n)
        .map(|_| rng.random_range(0..config.num_event_types))
        .collect();
    let query = types[rng.random_range(0..n)];

    let queried_s: Vec<f64> = times
        .iter()
        .zip(&types)
        .filter(|(_, &ty)| ty == query)
        .map(|(&t, _)| grid.frames_to_seconds(t))
        .collect();
    let labels = EventLabels::from_seconds(grid, &queried_s)?;

    let mut taper = vec![0.0f64; num_frames];
    for &t in labels.times_frames() {
        let k = grid.frame_of(t);
        taper[k] = taper[k].max(1.0);
        if k > 0 {
            taper[k - 1] = taper[k - 1].max(NEIGHBOR_TAPER);
        }
        if k + 1 < num_frames {
            taper[k + 1] = taper[k + 1].max(NEIGHBOR_TAPER);
        }
    }

    let dim = config.feature_dim;
    let mut data = vec![0.0; num_frames * dim];
    if config.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, config.noise_sigma)
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        for v in data.iter_mut() {
            *v = noise.sample(&mut rng);
        }
    }
    let signature = &signatures[query];
    for (k, &w) in taper.iter().enumerate() {
        if w > 0.0 {
            let scale = config.signal_amplitude * w;
            for (v, s) in data[k * dim..(k + 1) * dim].iter_mut().zip(signature) {
                *v += scale * s;
            }
        }
    }

    Ok(Example {
        id: format!("ex{index:06}"),
        features: FrameFeatures::new(data, dim, grid, query)?,
        labels,
        split: config.split_of(index),
    })
}

/// Generates a dataset. Output depends only on the config, not on `exec`.
pub fn generate_with(config: &GenConfig, exec: Exec) -> Result<TrainingSet> {
    config.validate()?;
    let signatures = type_signatures(
        config.num_event_types,
        config.feature_dim,
        config.signature_seed,
    );
    let indices: Vec<usize> = (0..config.num_examples).collect();
    let examples = exec.try_map(&indices, |&j| generate_one(config, &signatures, j))?;
    TrainingSet::new(examples)
}

pub fn generate(config: &GenConfig) -> Result<TrainingSet> {
    generate_with(config, Exec::Parallel)
}

/// One JSONL line.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleRecord {
    pub id: String,
    pub frame_ms: f64,
    pub num_frames: usize,
    pub feature_dim: usize,
    pub features: Vec<Vec<f64>>,
    pub query: usize,
    pub event_times_s: Vec<f64>,
    pub split: Split,
}

impl ExampleRecord {
    pub fn from_example(ex: &Example) -> Self {
        let grid = ex.features.grid();
        Self {
            id: ex.id.clone(),
            frame_ms: frame_ms_of(grid),
            num_frames: grid.num_frames(),
            feature_dim: ex.features.feature_dim(),
            features: ex.features.rows().map(<[f64]>::to_vec).collect(),
            query: ex.features.query_id(),
            event_times_s: ex.labels.times_s().to_vec(),
            split: ex.split,
        }
    }

    pub fn into_example(self) -> Result<Example> {
        let grid = FrameGrid::new(self.num_frames, self.frame_ms / 1000.0)?;
        if self.features.len() != self.num_frames {
            return Err(Error::Shape(format!(
                "num_frames is {} but features has {} rows",
                self.num_frames,
                self.features.len()
            )));
        }
        if let Some(bad) = self
            .features
            .iter()
            .position(|r| r.len() != self.feature_dim)
        {
            return Err(Error::Shape(format!(
                "frame {bad} has {} features, feature_dim is {}",
                self.features[bad].len(),
                self.feature_dim
            )));
        }
        let features =
            FrameFeatures::new(self.features.concat(), self.feature_dim, grid, self.query)?;
        let labels = EventLabels::from_seconds(grid, &self.event_times_s)?;
        Ok(Example {
            id: self.id,
            features,
            labels,
            split: self.split,
        })
    }
}

pub(crate) fn frame_ms_of(grid: FrameGrid) -> f64 {
    let ms = grid.frame_duration_s() * 1000.0;
    // undo the ulp drift of the seconds round trip (0.04 * 1000 etc.)
    let rounded = (ms * 1e9).round() / 1e9;
    if (rounded - ms).abs() <= 1e-12 * ms.abs().max(1.0) {
        rounded
    } else {
        ms
    }
}

pub fn write_dataset<W: Write>(mut out: W, set: &TrainingSet) -> Result<()> {
    for ex in &set.examples {
        let line = serde_json::to_string(&ExampleRecord::from_example(ex))
            .map_err(|e| Error::Parse(e.to_string()))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dataset_file(path: &Path, set: &TrainingSet) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dataset(std::io::BufWriter::new(file), set)
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<TrainingSet> {
    let mut examples = Vec::new();
    let mut frame_ms: Option<f64> = None;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExampleRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {line_no}: {e}")))?;
        match frame_ms {
            None => frame_ms = Some(record.frame_ms),
            Some(ms) if ms != record.frame_ms => {
                return Err(Error::Validation(format!(
                    "line {line_no}: frame_ms {} differs from {ms} on earlier lines",
                    record.frame_ms
                )))
            }
            Some(_) => {}
        }
        let example = record
            .into_example()
            .map_err(|e| Error::Validation(format!("line {line_no}: {e}")))?;
        examples.push(example);
    }
    TrainingSet::new(examples)
}

pub fn read_dataset_file(path: &Path) -> Result<TrainingSet> {
    let file = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenConfig {
        GenConfig {
            num_examples: 40,
            duration_frames: IntRange::exactly(60),
            events_per_example: IntRange::new(1, 4),
            seed: 5,
            ..GenConfig::default()
        }
    }

    #[test]
    fn clean_single_event_has_three_signal_frames() {
        let cfg = GenConfig {
            num_examples: 10,
            events_per_example: IntRange::exactly(1),
            noise_sigma: 0.0,
            signal_amplitude: 1.0,
            duration_frames: IntRange::exactly(50),
            event_time_range_frames: Some([5.0, 45.0]),
            ..GenConfig::default()
        };
        for ex in generate(&cfg).unwrap().examples {
            let energy = ex.features.frame_energy();
            let nonzero: Vec<usize> = (0..50).filter(|&k| energy[k] > 0.0).collect();
            let k = ex.features.grid().frame_of(ex.labels.times_frames()[0]);
            assert_eq!(nonzero, vec![k - 1, k, k + 1]);
            assert!((energy[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_and_exec_independent() {
        let a = generate_with(&small(), Exec::Sequential).unwrap();
        let b = generate_with(&small(), Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let c = generate(&GenConfig { seed: 6, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn event_range_is_respected() {
        let cfg = GenConfig {
            num_examples: 300,
            duration_frames: IntRange::exactly(200),
            event_time_range_frames: Some([0.0, 100.0]),
            events_per_example: IntRange::new(1, 5),
            ..GenConfig::default()
        };
        let set = generate(&cfg).unwrap();
        for ex in &set.examples {
            assert!(ex.labels.times_frames().iter().all(|&t| t < 100.0 + 1e-9));
            assert!(ex.labels.count() >= 1 && ex.labels.count() <= 5);
        }
    }

    #[test]
    fn too_narrow_range_fails() {
        let cfg = GenConfig {
            events_per_example: IntRange::exactly(10),
            event_time_range_frames: Some([0.0, 5.0]),
            ..small()
        };
        assert!(matches!(generate(&cfg), Err(Error::Generation(_))));
    }

    #[test]
    fn invalid_configs_rejected() {
        let cfg = GenConfig {
            event_time_range_frames: Some([10.0, 5.0]),
            ..small()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = GenConfig {
            event_time_range_frames: Some([0.0, 61.0]),
            ..small()
        };
        assert!(cfg.validate().is_err());
        let cfg = GenConfig {
            dev_fraction: 0.7,
            test_fraction: 0.5,
            ..small()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn splits_follow_fractions() {
        let set = generate(&small()).unwrap();
        assert_eq!(set.split(Split::Train).count(), 32);
        assert_eq!(set.split(Split::Dev).count(), 4);
        assert_eq!(set.split(Split::Test).count(), 4);
    }

    #[test]
    fn jsonl_write_read_write_is_byte_identical() {
        let set = generate(&small()).unwrap();
        let mut first = Vec::new();
        write_dataset(&mut first, &set).unwrap();
        let back = read_dataset(first.as_slice()).unwrap();
        assert_eq!(back, set);
        let mut second = Vec::new();
        write_dataset(&mut second, &back).unwrap();
        assert_eq!(first, second);
        assert!(std::str::from_utf8(&first)
            .unwrap()
            .contains("\"frame_ms\":40.0"));
    }

    #[test]
    fn missing_field_is_named() {
        let line = r#"{"id":"a","frame_ms":40.0,"num_frames":1,"feature_dim":1,"features":[[0.0]],"query":0,"split":"train"}"#;
        let err = read_dataset(line.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("event_times_s") && msg.contains("line 1"),
            "{msg}"
        );
    }

    #[test]
    fn frame_ms_mismatch_rejected() {
        let a = r#"{"id":"a","frame_ms":40.0,"num_frames":1,"feature_dim":1,"features":[[0.0]],"query":0,"event_times_s":[0.01],"split":"train"}"#;
        let b = r#"{"id":"b","frame_ms":20.0,"num_frames":1,"feature_dim":1,"features":[[0.0]],"query":0,"event_times_s":[0.01],"split":"train"}"#;
        let err = read_dataset(format!("{a}\n{b}\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = r#"{"id":"a","frame_ms":40.0,"num_frames":2,"feature_dim":1,"features":[[0.0]],"query":0,"event_times_s":[0.01],"split":"train"}"#;
        assert!(read_dataset(a.as_bytes()).is_err());
    }

    #[test]
    fn shifted_features_delay_rows() {
        let g = FrameGrid::with_frames(3).unwrap();
        let f = FrameFeatures::new(vec![1.0, 2.0, 3.0], 1, g, 0).unwrap();
        assert_eq!(f.shifted(1).as_slice(), &[0.0, 1.0, 2.0]);
        assert_eq!(f.shifted(5).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn range_config_parses_both_forms() {
        let r: IntRange = serde_json::from_str("7").unwrap();
        assert_eq!(r, IntRange::exactly(7));
        let r: IntRange = serde_json::from_str("[1, 10]").unwrap();
        assert_eq!(r, IntRange::new(1, 10));
    }
}
