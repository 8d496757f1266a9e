use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use framestamp::inference::{self, HeadKind};
use framestamp::model::{self, ScorerConfig, ScorerModel};
use framestamp::synth::{self, GenConfig};
use framestamp::{Exec, FrameGrid, IntensityProfile};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn gen_config() -> GenConfig {
    GenConfig {
        num_examples: 256,
        duration_frames: synth::IntRange::exactly(750),
        ..GenConfig::default()
    }
}

fn generation(c: &mut Criterion) {
    let cfg = gen_config();
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| synth::generate_with(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

fn batch_inference(c: &mut Criterion) {
    let set = synth::generate(&gen_config()).unwrap();
    let model = ScorerModel::init(
        ScorerConfig {
            feature_dim: 16,
            hidden_dim: 16,
            head_kind: HeadKind::Poisson,
        },
        0,
    )
    .unwrap();
    let mut group = c.benchmark_group("predict_examples");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| model::predict_examples(&model, black_box(&set.examples), exec).unwrap())
        });
    }
    group.finish();
}

fn thinning(c: &mut Criterion) {
    let rates: Vec<f64> = (0..500)
        .map(|k| 0.02 + 0.05 * (1.0 + (k as f64 * 0.05).sin()))
        .collect();
    let profile = IntensityProfile::new(rates, FrameGrid::with_frames(500).unwrap()).unwrap();
    let mut group = c.benchmark_group("sample_ihp_many");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| inference::sample_ihp_many(black_box(&profile), 0, 2000, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, generation, batch_inference, thinning);
criterion_main!(benches);
