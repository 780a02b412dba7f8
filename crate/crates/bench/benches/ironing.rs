use auction_design::fixtures::{irregular, regular_discrete_priors};
use auction_design::{iron, optimal_symmetric, solve_seller_worst, Method};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn ironing(c: &mut Criterion) {
    let g = irregular();
    c.bench_function("iron/irregular", |b| b.iter(|| iron(black_box(&g)).unwrap()));

    let prior = regular_discrete_priors().remove(2);
    c.bench_function("iron/discrete4", |b| b.iter(|| iron(black_box(&prior)).unwrap()));

    let design = solve_seller_worst(4, 0.3).unwrap().distribution;
    c.bench_function("iron/two-point-design", |b| b.iter(|| iron(black_box(&design)).unwrap()));

    let prof = iron(&g).unwrap();
    c.bench_function("revenue/closed-form-n5", |b| {
        b.iter(|| optimal_symmetric(black_box(&prof), 5, Method::ClosedForm).unwrap())
    });
    c.bench_function("revenue/quadrature-n5", |b| {
        b.iter(|| optimal_symmetric(black_box(&prof), 5, Method::Quadrature).unwrap())
    });
    let mut group = c.benchmark_group("revenue/monte-carlo");
    group.sample_size(10);
    group.bench_function("n2-1e5", |b| {
        b.iter(|| optimal_symmetric(&prof, 2, Method::MonteCarlo { trials: 100_000, seed: 1 }).unwrap())
    });
    group.finish();
}

criterion_group!(benches, ironing);
criterion_main!(benches);
