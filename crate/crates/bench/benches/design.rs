use auction_design::{solve_buyer_optimal, solve_seller_worst, thresholds};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn design(c: &mut Criterion) {
    let mut sw = c.benchmark_group("solve/seller-worst");
    for n in [2usize, 10, 1000] {
        sw.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| solve_seller_worst(n, black_box(0.4)).unwrap())
        });
    }
    sw.finish();

    let mut bo = c.benchmark_group("solve/buyer-optimal");
    for (n, p) in [(2usize, 0.4), (3, 0.3), (10, 0.2), (1000, 0.4)] {
        bo.bench_with_input(BenchmarkId::new(n.to_string(), p), &(n, p), |b, &(n, p)| {
            b.iter(|| solve_buyer_optimal(n, black_box(p)).unwrap())
        });
    }
    bo.finish();

    c.bench_function("thresholds/n50", |b| b.iter(|| thresholds(black_box(50)).unwrap()));
}

criterion_group!(benches, design);
criterion_main!(benches);
