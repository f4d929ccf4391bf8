use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eel_bench::{exponential_mean, model1};
use eel_core::*;

fn dual(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_dual");
    let opts = SolverOptions::default();
    for n in [20, 100, 1000] {
        let (model, sample) = exponential_mean(n, 1);
        group.bench_with_input(BenchmarkId::new("mean", n), &n, |b, _| {
            b.iter(|| solve_dual(&model, &sample, black_box(&[1.1]), &opts).unwrap())
        });
        let (model, sample) = model1(n, 2);
        group.bench_with_input(BenchmarkId::new("model1", n), &n, |b, _| {
            b.iter(|| solve_dual(&model, &sample, black_box(&[1.2, 1.9]), &opts).unwrap())
        });
    }
    group.finish();
}

fn extended(c: &mut Criterion) {
    let (model, sample) = model1(30, 3);
    let eval = EelEvaluator::new(&model, &sample, EvalOptions::default()).unwrap();
    let theta = [eval.center()[0] + 1.5, eval.center()[1] - 0.1];
    c.bench_function("eel1 model1 n=30", |b| b.iter(|| eval.eel(black_box(&theta), ExpansionOrder::First).unwrap()));
    c.bench_function("eel2 model1 n=30", |b| b.iter(|| eval.eel(black_box(&theta), ExpansionOrder::Second).unwrap()));
    c.bench_function("evaluator setup model1 n=30", |b| {
        b.iter(|| EelEvaluator::new(&model, black_box(&sample), EvalOptions::default()).unwrap())
    });
}

fn coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage");
    group.sample_size(10);
    let mut config = StudyConfig::new(StudyModel::Model1, 20);
    config.replicates = 50;
    config.workers = Some(1);
    group.bench_function("model1 n=20 50 reps", |b| b.iter(|| run_coverage(black_box(&config)).unwrap()));
    group.finish();
}

criterion_group!(benches, dual, extended, coverage);
criterion_main!(benches);
