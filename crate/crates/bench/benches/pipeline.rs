use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pulsescope::evaluation::{evaluate_waveforms, Estimate};
use pulsescope::formats::GroundTruth;
use pulsescope::hrv::analyze;
use pulsescope::spectral::welch;
use pulsescope::synth::{synth_chunk, SynthChunk, SynthSpec};
use pulsescope::vitals::estimate_hr;
use pulsescope::*;
use std::hint::black_box;

fn chunk() -> SynthChunk {
    let spec = SynthSpec { duration_s: 60.0, noise_sigma: 0.1, seed: 1, ..Default::default() };
    synth_chunk(&spec, 30.0).expect("valid spec")
}

fn methods(c: &mut Criterion) {
    let cfg = Config::default();
    let data = chunk();
    let mut group = c.benchmark_group("extract_60s");
    for kind in [MethodKind::G, MethodKind::Chrom, MethodKind::Pos] {
        let m = RppgMethod::from_config(kind, &cfg);
        group.bench_with_input(BenchmarkId::from_parameter(kind.name()), &data.trace, |b, t| {
            b.iter(|| m.extract(black_box(t), &cfg).unwrap())
        });
    }
    group.finish();
}

fn analysis(c: &mut Criterion) {
    let cfg = Config::default();
    let data = chunk();
    let ppg = RppgMethod::from_config(MethodKind::Pos, &cfg).extract(&data.trace, &cfg).unwrap().ppg;
    c.bench_function("welch_60s", |b| b.iter(|| welch(black_box(ppg.values()), 30.0, 300).unwrap()));
    c.bench_function("estimate_hr_60s", |b| b.iter(|| estimate_hr(black_box(&ppg), &cfg.vitals).unwrap()));
    c.bench_function("hrv_analyze_60s", |b| b.iter(|| analyze(black_box(&ppg), &cfg, false)));
}

fn chunk_end_to_end(c: &mut Criterion) {
    let cfg = Config::default();
    let data = chunk();
    let pos = RppgMethod::from_config(MethodKind::Pos, &cfg);
    let gt = GroundTruth { ppg: data.ppg.clone(), resp: Some(data.resp.clone()) };
    c.bench_function("chunk_trace_to_metrics_60s", |b| {
        b.iter(|| {
            let est = Estimate { ppg: pos.extract(black_box(&data.trace), &cfg).unwrap().ppg, resp: None };
            let mut row = MetricsRow::default();
            evaluate_waveforms(&mut row, &est, &gt, None, &cfg);
            row
        })
    });
}

criterion_group!(benches, methods, analysis, chunk_end_to_end);
criterion_main!(benches);
