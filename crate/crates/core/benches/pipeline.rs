use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use retrace_core::annotator::{annotate_heuristic_batch, annotate_heuristic_with};
use retrace_core::exec::ExecMode;
use retrace_core::synth::cue_trace;
use retrace_core::SteppedTrace;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn single_trace(c: &mut Criterion) {
    let mut group = c.benchmark_group("annotate_single");
    for n in [2_000, 20_000] {
        let stepped = cue_trace(&mut ChaCha8Rng::seed_from_u64(n as u64), n).stepped;
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &stepped, |b, s| {
                b.iter(|| annotate_heuristic_with(black_box(s), mode))
            });
        }
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let traces: Vec<SteppedTrace> = (0..256).map(|_| cue_trace(&mut rng, 400).stepped).collect();
    let mut group = c.benchmark_group("annotate_batch_256x400");
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| annotate_heuristic_batch(black_box(&traces), mode)));
    }
    group.finish();
}

criterion_group!(benches, single_trace, batch);
criterion_main!(benches);
