//! `framestamp`: generate synthetic grounding data, train frame scorers,
//! extract timestamps, score them, and benchmark extraction cost.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "framestamp",
    version,
    about = "Frame-level timestamp heads: data, training, inference, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset as JSONL.
    Gen(GenArgs),
    /// Train a frame scorer and write a checkpoint plus per-epoch history.
    Train(TrainArgs),
    /// Extract timestamps for every example of a dataset.
    Infer(InferArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Compare single-pass extraction with a simulated autoregressive decoder.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// TOML run config; its [gen] section is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides gen.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides gen.num_examples.
    #[arg(long)]
    pub num_examples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset JSONL; trains on `train`, selects the checkpoint on `dev`.
    #[arg(long)]
    pub data: PathBuf,
    /// binary, poisson or interp.
    #[arg(long)]
    pub loss: Option<String>,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// History path; defaults to the checkpoint path with a `.history.json` extension.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Hidden units; 0 for the linear head.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// `auto` or a positive number.
    #[arg(long)]
    pub class_weight: Option<String>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Prediction JSONL, one array of {"index", "start"} per example.
    #[arg(long)]
    pub out: PathBuf,
    /// Restrict to one split (train, dev, test); all examples by default.
    #[arg(long)]
    pub split: Option<String>,
    /// Extract this many timestamps per example instead of the labelled count.
    #[arg(long)]
    pub count_override: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prediction JSONL from `infer`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Dataset JSONL or another prediction file, matched line by line.
    #[arg(long)]
    pub truth: PathBuf,
    /// Comma-separated tolerances in seconds.
    #[arg(long, value_delimiter = ',')]
    pub tolerances: Option<Vec<f64>>,
    /// none, count, or time:<comma-separated edges in seconds>.
    #[arg(long)]
    pub stratify: Option<String>,
    /// json, table or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// When the truth is a dataset, keep only this split (must match `infer --split`).
    #[arg(long)]
    pub split: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated frame counts.
    #[arg(long, value_delimiter = ',')]
    pub frames: Option<Vec<usize>>,
    #[arg(long)]
    pub timestamps: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Checkpoint to benchmark; a randomly initialized scorer otherwise.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report("usage", &e.to_string());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Train(a) => commands::train(a),
        Command::Infer(a) => commands::infer(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(error_kind(&e), &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<framestamp::Error>() {
            return err.kind();
        }
        if cause.is::<toml::de::Error>() {
            return "config";
        }
        if cause.is::<serde_json::Error>() {
            return "parse";
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
    }
    "invalid_input"
}

/// One JSON line on stderr.
fn report(kind: &str, message: &str) {
    let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
    let line = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{line}");
}
