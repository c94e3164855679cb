use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use forcelayout::metrics::evaluate;
use forcelayout::{accumulate, optimize};
use forcelayout_bench::workloads;

fn bench_optimize(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimize");
    group.sample_size(20);
    for w in workloads() {
        group.bench_function(w.name, |b| {
            b.iter_batched(
                || w.scene.clone(),
                |s| optimize(&s, &w.constraints, &w.params).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_ledger(c: &mut Criterion) {
    let w = workloads().remove(0);
    c.bench_function("accumulate/cluttered", |b| {
        b.iter(|| accumulate(&w.scene, &w.constraints, &w.params).unwrap())
    });
    c.bench_function("evaluate/cluttered", |b| b.iter(|| evaluate(&w.scene)));
}

criterion_group!(benches, bench_optimize, bench_ledger);
criterion_main!(benches);
