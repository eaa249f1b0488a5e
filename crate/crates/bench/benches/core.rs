//! Hot paths: embedding construction (exact and float), the reducibility
//! subset scan, and black-box kink detection.

use criterion::{criterion_group, criterion_main, Criterion};
use relu_ident_core::diagnostics::is_irreducible;
use relu_ident_core::embedding::embed;
use relu_ident_core::network::Architecture;
use relu_ident_core::recovery::{detect_hyperplanes, params_oracle};
use relu_ident_core::sampling::{random_params, random_recoverable};
use std::hint::black_box;

fn bench_embed(c: &mut Criterion) {
    let arch = Architecture::new(vec![4, 6, 6, 4]).unwrap();
    let exact = random_params(&arch, 7);
    let float = exact.to_f64();
    c.bench_function("embed/exact-4-6-6-4", |b| {
        b.iter(|| embed(black_box(&exact)).unwrap())
    });
    c.bench_function("embed/float-4-6-6-4", |b| {
        b.iter(|| embed(black_box(&float)).unwrap())
    });
}

fn bench_irreducibility(c: &mut Criterion) {
    let arch = Architecture::new(vec![3, 12, 2]).unwrap();
    let p = random_params(&arch, 11);
    c.bench_function("irreducibility/subset-scan-width-12", |b| {
        b.iter(|| is_irreducible(black_box(&p), 12))
    });
}

fn bench_kink_detection(c: &mut Criterion) {
    let plant = random_recoverable(3, 5, 2, 3).unwrap().to_f64();
    let mut group = c.benchmark_group("recovery");
    group.sample_size(10);
    group.bench_function("detect-hyperplanes-d3-h5", |b| {
        b.iter(|| {
            let oracle = params_oracle(black_box(&plant));
            detect_hyperplanes(&oracle, 3.0, 24, 1e-6, 1).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_embed, bench_irreducibility, bench_kink_detection);
criterion_main!(benches);
