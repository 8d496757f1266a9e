//! Frame-level timestamp heads for sequence models.
//!
//! A projection head scores every frame of a sequence. Two objectives train
//! those scores: a class-reweighted binary cross-entropy and the negative
//! log-likelihood of an inhomogeneous Poisson process whose intensity is a
//! piecewise-constant spline over frames. Timestamps are read back either as
//! the top-k frames or as exact posterior modes of each ordered event time.
//!
//! Modules:
//! - [`spline`]: frame grid, intensity profiles, cumulative hazards, labels
//! - [`losses`]: binary and Poisson losses with analytic score gradients
//! - [`inference`]: top-k and posterior-mode extraction, grid oracle, thinning sampler
//! - [`model`]: frame-local scorer, AdamW training loop, checkpoints
//! - [`synth`]: synthetic grounding tasks and their JSONL format
//! - [`eval`]: tolerance accuracy, MAD, stratified reports
//! - [`throughput`]: single-pass vs autoregressive cost comparison
//!
//! With the default `parallel` feature, batch operations that take an
//! [`Exec`] run on the rayon pool; results are identical either way.

pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod inference;
pub mod losses;
pub mod model;
pub mod par;
pub mod spline;
pub mod stats;
pub mod synth;
pub mod throughput;

pub use error::{Error, Result};
pub use inference::{HeadKind, TimestampPrediction};
pub use losses::{ClassWeight, FrameScores, LossResult};
pub use par::Exec;
pub use spline::{CumulativeHazard, EventLabels, FrameGrid, IntensityProfile};
