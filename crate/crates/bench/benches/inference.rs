use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tablemap::flow::max_weight_matching;
use tablemap::infer::{label_table_independent, max_marginals, run, Algorithm};
use tablemap_bench::random_model;

fn per_table(c: &mut Criterion) {
    let model = random_model(7, 1, 6, 4, 0);
    let theta = &model.tables[0].theta;
    c.bench_function("independent/6x4", |b| b.iter(|| label_table_independent(theta, 4, 2).unwrap()));
    c.bench_function("max_marginals/6x4", |b| b.iter(|| max_marginals(theta, 4).unwrap()));
    let w: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 11) as f64).collect()).collect();
    c.bench_function("matching/6x6", |b| b.iter(|| max_weight_matching(&[1; 6], &[1; 6], &w).unwrap()));
}

fn collective(c: &mut Criterion) {
    let mut group = c.benchmark_group("collective");
    for tables in [10, 40] {
        let model = random_model(11, tables, 4, 3, 3);
        for algo in [Algorithm::Independent, Algorithm::TableCentric, Algorithm::AlphaExpansion] {
            group.bench_with_input(BenchmarkId::new(algo.as_str(), tables), &model, |b, m| {
                b.iter(|| run(m, algo).unwrap())
            });
        }
    }
    let small = random_model(13, 3, 3, 2, 2);
    group.bench_function("brute-force/3x3", |b| b.iter(|| run(&small, Algorithm::BruteForce).unwrap()));
    group.finish();
}

criterion_group!(benches, per_table, collective);
criterion_main!(benches);
