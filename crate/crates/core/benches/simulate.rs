use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use tubgemm::gemm::{simulate_gemm_with, GemmConfig};
use tubgemm::gen::{random_operands, seeded_rng};
use tubgemm::sweep::{exactness_sweep, SweepOptions};
use tubgemm::unary::Polarity;
use tubgemm::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn gemm(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_gemm");
    group.sample_size(20);
    for size in [32usize, 64, 128] {
        let cfg = GemmConfig::square(size, 8, Polarity::Bipolar);
        let ops = random_operands(&mut seeded_rng(42, 0), &cfg, Some(0.25)).unwrap();
        group.throughput(Throughput::Elements((size * size * size) as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, size), &ops, |b, ops| {
                b.iter(|| simulate_gemm_with(&cfg, black_box(ops), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("exactness_sweep");
    group.sample_size(10);
    let opts = SweepOptions {
        instances: 48,
        max_size: 32,
        ..SweepOptions::default()
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exactness_sweep(black_box(&opts), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, gemm, sweep);
criterion_main!(benches);
