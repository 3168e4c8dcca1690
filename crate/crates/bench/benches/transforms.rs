use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use specaug_bench::fixture;
use specaug_core::{
    dct2_forward, dct2_inverse, dwt2_forward, dwt2_inverse, metrics::hole_fill, synthesize,
    AugmentSpec, DwtParams, Method, PixelMask, WaveletBasis,
};
use std::hint::black_box;

fn dct(c: &mut Criterion) {
    let mut group = c.benchmark_group("dct2");
    for n in [64, 128, 256] {
        let img = fixture(n);
        let comps = dct2_forward(&img);
        group.bench_with_input(BenchmarkId::new("forward", n), &img, |b, img| {
            b.iter(|| dct2_forward(black_box(img)))
        });
        group.bench_with_input(BenchmarkId::new("inverse", n), &comps, |b, comps| {
            b.iter(|| dct2_inverse(black_box(comps)).unwrap())
        });
    }
    group.finish();
}

fn dwt(c: &mut Criterion) {
    let mut group = c.benchmark_group("dwt2");
    for basis in [WaveletBasis::haar(), WaveletBasis::db4()] {
        let img = fixture(256);
        let pyr = dwt2_forward(&img, &basis, 2).unwrap();
        let name = basis.kind().as_str();
        group.bench_function(BenchmarkId::new("forward", name), |b| {
            b.iter(|| dwt2_forward(black_box(&img), &basis, 2).unwrap())
        });
        group.bench_function(BenchmarkId::new("inverse", name), |b| {
            b.iter(|| dwt2_inverse(black_box(&pyr), &basis).unwrap())
        });
    }
    group.finish();
}

fn synth(c: &mut Criterion) {
    let img = fixture(128);
    let mut group = c.benchmark_group("synthesize_r5");
    for method in [Method::Dct, Method::Dwt(DwtParams::default())] {
        let spec = AugmentSpec {
            method,
            replications: 5,
            eta: 0.005,
            seed: 1,
        };
        group.bench_function(spec.method.name(), |b| {
            b.iter(|| synthesize(black_box(&img), &spec, 0).unwrap())
        });
    }
    group.finish();
}

fn morphology(c: &mut Criterion) {
    let img = fixture(512);
    let mask = PixelMask::from_image(&img, 140.0);
    c.bench_function("hole_fill_512", |b| b.iter(|| hole_fill(black_box(&mask))));
}

criterion_group!(benches, dct, dwt, synth, morphology);
criterion_main!(benches);
