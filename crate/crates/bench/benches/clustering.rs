//! Clustering pipeline hot paths: representation builders, the spectral
//! embedding, and the assignment-based accuracy.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lrsc_bench::bench_dataset;
use lrsc_core::clustering::{self, Method};
use lrsc_core::DEFAULT_RANK_TOL;

fn bench_representations(c: &mut Criterion) {
    let data = bench_dataset();
    c.bench_function("sim 60x100", |b| {
        b.iter(|| clustering::sim(black_box(&data.points), DEFAULT_RANK_TOL).expect("projector"))
    });
    for method in [Method::Dssim, Method::Cssim, Method::Ssim] {
        c.bench_function(&format!("{method} 60x100 lambda=0.5"), |b| {
            b.iter(|| {
                clustering::reconstruction(black_box(&data.points), method, 0.5)
                    .expect("representation")
            })
        });
    }
}

fn bench_spectral_stage(c: &mut Criterion) {
    let data = bench_dataset();
    let (z, _) = clustering::reconstruction(&data.points, Method::Cssim, 0.5).expect("repr");
    let w = clustering::affinity(&z).expect("affinity");
    c.bench_function("affinity 100x100", |b| {
        b.iter(|| clustering::affinity(black_box(&z)).expect("affinity"))
    });
    c.bench_function("spectral_cluster 100 points k=4", |b| {
        b.iter(|| clustering::spectral_cluster(black_box(&w), 4, 0).expect("clustering"))
    });
    c.bench_function("pipeline 60x100", |b| {
        b.iter(|| {
            clustering::run_pipeline(black_box(&data), Method::Cssim, 0.5, 4, 0).expect("pipeline")
        })
    });
}

fn bench_accuracy(c: &mut Criterion) {
    // Matching cost matrices stay small even for many points, so this
    // mostly measures the label-counting and assignment bookkeeping.
    let truth: Vec<usize> = (0..600).map(|i| i % 6).collect();
    let pred: Vec<usize> = (0..600).map(|i| (i + i / 7) % 6).collect();
    c.bench_function("accuracy 600 points 6 clusters", |b| {
        b.iter(|| clustering::accuracy(black_box(&pred), &truth).expect("matching"))
    });
}

criterion_group!(pipeline, bench_representations, bench_spectral_stage, bench_accuracy);
criterion_main!(pipeline);
