use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use torusct::*;
use torusct_bench::{flag_grid, flag_samples};

fn directions(c: &mut Criterion) {
    c.bench_function("direction_set r=50", |b| b.iter(|| direction_set(black_box(50)).unwrap()));
}

fn forward(c: &mut Criterion) {
    let grid = flag_grid(256);
    let v = IntDirection::new(7, -3).unwrap();
    c.bench_function("xray_pixel n=256 v=(7,-3)", |b| b.iter(|| xray_pixel(&grid, black_box([0.31, 0.0]), v)));
    let dirs = direction_set(8).unwrap();
    c.bench_function("acquire pixel n=256 r=8", |b| {
        b.iter(|| acquire(ForwardModel::Pixel(&grid), &dirs, 32, Rule::Left).unwrap())
    });
}

fn inverse(c: &mut Criterion) {
    let data = flag_samples(256, 16, 64);
    c.bench_function("reconstruct_table r=16", |b| b.iter(|| reconstruct_table(&data, 16.0, false).unwrap()));
    let table = reconstruct_table(&data, 16.0, false).unwrap();
    c.bench_function("evaluate_grid r=16 n=256", |b| b.iter(|| evaluate_grid(&table, 256).unwrap()));
}

criterion_group!(benches, directions, forward, inverse);
criterion_main!(benches);
