use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spineseg_bench::standard_phantom;
use spineseg_core::*;

fn stages(c: &mut Criterion) {
    let p = standard_phantom(0);
    let data = p.image.to_f64_vec();
    let smoothed = quantize(&diffuse(&p.image, &DiffusionParams::default()).unwrap());

    c.bench_function("diffuse_256", |b| {
        b.iter(|| diffuse(black_box(&p.image), &DiffusionParams::default()).unwrap())
    });
    c.bench_function("otsu_256", |b| {
        b.iter(|| otsu_threshold(black_box(&smoothed)).unwrap())
    });
    c.bench_function("kmeans_256", |b| {
        b.iter(|| kmeans_fit(black_box(&data), 3, 100, 0).unwrap())
    });
    c.bench_function("fcm_256", |b| {
        b.iter(|| fcm_fit(black_box(&data), &FcmParams::default()).unwrap())
    });
    c.bench_function("connected_components_256", |b| {
        b.iter(|| connected_components(black_box(&p.truth), Connectivity::Eight))
    });
    let shifted = erode(&p.truth, 2);
    c.bench_function("hausdorff_256", |b| {
        b.iter(|| hausdorff(black_box(&p.truth), black_box(&shifted)).unwrap())
    });
}

fn end_to_end(c: &mut Criterion) {
    let p = standard_phantom(1);
    let cfg = PipelineConfig::default();
    let mut group = c.benchmark_group("run_pipeline");
    group.sample_size(20);
    for method in Method::ALL {
        group.bench_function(method.as_str(), |b| {
            b.iter(|| run_pipeline(black_box(&p.image), Some(&p.truth), &cfg, method).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stages, end_to_end);
criterion_main!(benches);
