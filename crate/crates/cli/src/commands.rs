use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use framestamp::eval::{self, BucketRule, MetricReport, ScoredExample};
use framestamp::inference;
use framestamp::model::{self, LossKind, ScorerConfig, ScorerModel};
use framestamp::synth::{self, Example, Split};
use framestamp::throughput::{self, BenchConfig};
use framestamp::{Error, Exec, HeadKind};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{BenchArgs, EvalArgs, GenArgs, InferArgs, TrainArgs};

/// One extracted timestamp in a prediction file.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stamp {
    pub index: usize,
    pub start: f64,
}

fn input(path: &Path) -> Result<PathBuf> {
    let resolved = path
        .canonicalize()
        .with_context(|| format!("input {} not found", path.display()))?;
    if !resolved.is_file() {
        bail!(Error::InvalidValue(format!(
            "{} is not a file",
            path.display()
        )));
    }
    Ok(resolved)
}

fn output(path: &Path) -> Result<PathBuf> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let dir = parent
        .canonicalize()
        .with_context(|| format!("output directory {} does not exist", parent.display()))?;
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    Ok(dir.join(name))
}

fn parse_split(s: &str) -> Result<Split> {
    Ok(match s {
        "train" => Split::Train,
        "dev" => Split::Dev,
        "test" => Split::Test,
        other => bail!(Error::InvalidValue(format!(
            "unknown split {other:?}; expected train, dev or test"
        ))),
    })
}

fn select(examples: &[Example], split: Option<Split>) -> Vec<&Example> {
    examples
        .iter()
        .filter(|ex| split.is_none_or(|s| ex.split == s))
        .collect()
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn gen(args: GenArgs) -> Result<()> {
    let config_path = args.config.as_deref().map(input).transpose()?;
    let out = output(&args.out)?;
    let mut cfg = RunConfig::load(config_path.as_deref())?.gen;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.num_examples {
        cfg.num_examples = n;
    }
    let set = synth::generate(&cfg)?;
    synth::write_dataset_file(&out, &set)?;
    let count = |s| set.split(s).count();
    println!(
        "{}",
        serde_json::json!({
            "out": out,
            "examples": set.len(),
            "train": count(Split::Train),
            "dev": count(Split::Dev),
            "test": count(Split::Test),
        })
    );
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let config_path = args.config.as_deref().map(input).transpose()?;
    let data = input(&args.data)?;
    let out = output(&args.out)?;
    let history_path = output(
        &args
            .history
            .clone()
            .unwrap_or_else(|| args.out.with_extension("history.json")),
    )?;

    let mut section = RunConfig::load(config_path.as_deref())?.train;
    if let Some(loss) = &args.loss {
        section.loss = loss.parse::<LossKind>()?;
    }
    if let Some(seed) = args.seed {
        section.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        section.epochs = epochs;
    }
    if let Some(lr) = args.lr {
        section.learning_rate = lr;
    }
    if let Some(b) = args.batch_size {
        section.batch_size = b;
    }
    if let Some(h) = args.hidden {
        section.hidden_dim = h;
    }
    if let Some(w) = &args.class_weight {
        section.class_weight = w.parse()?;
    }

    let dataset = synth::read_dataset_file(&data)?;
    let feature_dim = dataset
        .feature_dim()
        .ok_or_else(|| Error::Validation("dataset is empty".into()))?;
    let scorer = ScorerConfig {
        feature_dim,
        hidden_dim: section.hidden_dim,
        head_kind: section.loss.head(),
    };
    let outcome = model::train(&section.to_train_config(), scorer, &dataset)?;
    model::save_model(&out, &outcome.model)?;

    let history = serde_json::json!({
        "loss": section.loss,
        "best_epoch": outcome.best_epoch,
        "epochs": outcome.history,
    });
    fs::write(&history_path, format!("{history:#}\n"))
        .with_context(|| format!("writing {}", history_path.display()))?;

    let best = &outcome.history[outcome.best_epoch - 1];
    println!(
        "{}",
        serde_json::json!({
            "checkpoint": out,
            "history": history_path,
            "best_epoch": outcome.best_epoch,
            "dev_accuracy": best.dev_accuracy,
            "dev_mad_s": best.dev_mad_s,
        })
    );
    Ok(())
}

fn predict_one(
    model: &ScorerModel,
    ex: &Example,
    count_override: Option<usize>,
) -> framestamp::Result<Vec<Stamp>> {
    let scores = model.score_frames(&ex.features)?;
    let count = count_override.unwrap_or_else(|| ex.labels.count());
    let preds = inference::extract(&scores, model.config().head_kind, count)?;
    Ok(preds
        .iter()
        .map(|p| Stamp {
            index: p.event_index,
            start: p.time_s,
        })
        .collect())
}

pub fn infer(args: InferArgs) -> Result<()> {
    let model_path = input(&args.model)?;
    let data = input(&args.data)?;
    let out = output(&args.out)?;
    let split = args.split.as_deref().map(parse_split).transpose()?;

    let model = model::load_model(&model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let dataset = synth::read_dataset_file(&data)?;
    let examples = select(&dataset.examples, split);
    let rows = Exec::Parallel.try_map(&examples, |ex| {
        predict_one(&model, ex, args.count_override)
            .map_err(|e| anyhow::Error::new(e).context(format!("example {}", ex.id)))
    })?;

    let mut w = BufWriter::new(
        fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?,
    );
    for row in &rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    println!(
        "{}",
        serde_json::json!({ "out": out, "examples": rows.len() })
    );
    Ok(())
}

/// Parses a prediction file into per-line start times, ordered by `index`.
pub fn read_predictions(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut stamps: Vec<Stamp> = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        stamps.sort_by_key(|s| s.index);
        rows.push(stamps.into_iter().map(|s| s.start).collect());
    }
    Ok(rows)
}

fn first_char(path: &Path) -> Result<Option<char>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.chars().find(|c| !c.is_whitespace()))
}

pub fn parse_stratify(s: &str) -> Result<Option<BucketRule>> {
    match s {
        "none" => Ok(None),
        "count" => Ok(Some(BucketRule::event_count_default())),
        _ => match s.strip_prefix("time:") {
            Some(edges) => {
                let edges = edges
                    .split(',')
                    .map(|e| e.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| {
                        Error::InvalidValue(format!("time bucket edges {edges:?}: {e}"))
                    })?;
                Ok(Some(BucketRule::TimeRange(edges)))
            }
            None => bail!(Error::InvalidValue(format!(
                "unknown stratification {s:?}; expected none, count or time:<edges>"
            ))),
        },
    }
}

fn render(report: &MetricReport, format: &str) -> Result<String> {
    Ok(match format {
        "json" => report.to_json() + "\n",
        "table" => report.to_table(),
        "csv" => report.to_csv(),
        other => bail!(Error::InvalidValue(format!(
            "unknown format {other:?}; expected json, table or csv"
        ))),
    })
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let config_path = args.config.as_deref().map(input).transpose()?;
    let pred_path = input(&args.pred)?;
    let truth_path = input(&args.truth)?;
    let out = args.out.as_deref().map(output).transpose()?;

    let mut section = RunConfig::load(config_path.as_deref())?.eval;
    if let Some(t) = args.tolerances {
        section.tolerances = t;
    }
    if let Some(s) = args.stratify {
        section.stratify = s;
    }
    if let Some(f) = args.format {
        section.format = f;
    }
    let rule = parse_stratify(&section.stratify)?;
    let split = args.split.as_deref().map(parse_split).transpose()?;

    let predicted = read_predictions(&pred_path)?;
    let truths: Vec<(String, Vec<f64>)> = match first_char(&truth_path)? {
        Some('{') => {
            let dataset = synth::read_dataset_file(&truth_path)?;
            select(&dataset.examples, split)
                .into_iter()
                .map(|ex| (ex.id.clone(), ex.labels.times_s().to_vec()))
                .collect()
        }
        Some('[') => {
            if split.is_some() {
                bail!(Error::InvalidValue(
                    "--split needs a dataset as --truth".into()
                ));
            }
            read_predictions(&truth_path)?
                .into_iter()
                .enumerate()
                .map(|(j, t)| (format!("line{}", j + 1), t))
                .collect()
        }
        _ => bail!(Error::Parse(format!(
            "{} is neither a dataset nor a prediction file",
            truth_path.display()
        ))),
    };
    if predicted.len() != truths.len() {
        bail!(Error::Evaluation(format!(
            "{} prediction lines for {} truth examples",
            predicted.len(),
            truths.len()
        )));
    }
    let scored: Vec<ScoredExample> = truths
        .into_iter()
        .zip(predicted)
        .map(|((id, truth_s), predicted_s)| ScoredExample {
            id,
            predicted_s,
            truth_s,
        })
        .collect();
    let report = match &rule {
        None => eval::score(&scored, &section.tolerances)?,
        Some(rule) => eval::stratify(&scored, &section.tolerances, rule)?,
    };
    emit(&render(&report, &section.format)?, out.as_deref())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let config_path = args.config.as_deref().map(input).transpose()?;
    let model_path = args.model.as_deref().map(input).transpose()?;
    let out = args.out.as_deref().map(output).transpose()?;

    let mut section = RunConfig::load(config_path.as_deref())?.bench;
    if let Some(f) = args.frames {
        section.frames = f;
    }
    if let Some(n) = args.timestamps {
        section.timestamps = n;
    }
    if let Some(r) = args.repeats {
        section.repeats = r;
    }
    let model = match &model_path {
        Some(p) => {
            model::load_model(p).with_context(|| format!("loading model {}", p.display()))?
        }
        None => ScorerModel::init(
            ScorerConfig {
                feature_dim: section.feature_dim,
                hidden_dim: section.hidden_dim,
                head_kind: HeadKind::Poisson,
            },
            section.seed,
        )?,
    };
    let cfg = BenchConfig {
        frames: section.frames,
        timestamps: section.timestamps,
        chars_per_timestamp: section.chars_per_timestamp,
        repeats: section.repeats,
        seed: section.seed,
    };
    let report = throughput::run_bench(&model, &cfg)?;
    emit(
        &format!("{}\n", serde_json::to_string_pretty(&report)?),
        out.as_deref(),
    )
}
