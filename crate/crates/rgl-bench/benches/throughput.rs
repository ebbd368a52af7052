//! Hot-path throughput: the union-find tracker, full trials of the main
//! strategies, the exact orientation, and the spectral/ODE oracles. The
//! million-round random-coloring trial is the wall-clock regression gate;
//! it is expected to stay in low single-digit seconds on commodity
//! hardware.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use rgl_core::graph_state::ComponentTracker;
use rgl_core::lab::{run_trial, ExperimentConfig};
use rgl_core::oracles::{integrate_x, KernelMatrix};
use rgl_core::orientation::exact_r_orientation;
use rgl_core::strategies::{StrategyKind, StrategySpec};

fn random_pairs(n: u32, m: usize, seed: u64) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let u = rng.random_range(0..n);
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            (u, v)
        })
        .collect()
}

fn bench_tracker(c: &mut Criterion) {
    let n = 1_000_000usize;
    let edges = random_pairs(n as u32, n, 1);
    let mut group = c.benchmark_group("tracker");
    group.sample_size(10);
    group.bench_function("million_unions", |b| {
        b.iter_batched_ref(
            || ComponentTracker::new(n),
            |tracker| {
                for &(u, v) in &edges {
                    black_box(tracker.union(u, v));
                }
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);

    let random = ExperimentConfig::new(
        1_000_000,
        vec![1.0],
        1,
        1,
        StrategySpec::new(StrategyKind::RandomColoring, 2, 2),
    );
    group.bench_function("random_coloring_1e6", |b| {
        b.iter(|| black_box(run_trial(&random, 0).unwrap()))
    });

    let matching = ExperimentConfig::new(
        100_000,
        vec![1.06],
        1,
        3,
        StrategySpec::new(StrategyKind::IsolatedMatching, 2, 4),
    );
    group.bench_function("isolated_matching_1e5", |b| {
        b.iter(|| black_box(run_trial(&matching, 0).unwrap()))
    });

    let orient = ExperimentConfig::new(
        10_000,
        vec![10.0],
        1,
        5,
        StrategySpec::new(StrategyKind::Orient, 5, 6),
    );
    group.bench_function("orient_1e5_rounds", |b| {
        b.iter(|| black_box(run_trial(&orient, 0).unwrap()))
    });
    group.finish();
}

fn bench_orientation(c: &mut Criterion) {
    let n = 10_000usize;
    let edges = random_pairs(n as u32, 3 * n / 2, 7);
    let mut group = c.benchmark_group("orientation");
    group.sample_size(10);
    group.bench_function("exact_2_orientation_n1e4", |b| {
        b.iter(|| black_box(exact_r_orientation(n, &edges, 2)))
    });
    group.finish();
}

fn bench_oracles(c: &mut Criterion) {
    c.bench_function("integrate_x_step_1e-4", |b| {
        b.iter(|| black_box(integrate_x(1.2, 1e-4).unwrap()))
    });
    let m = KernelMatrix::top_left_ones(50, 33);
    c.bench_function("spectral_radius_k50", |b| {
        b.iter(|| black_box(m.spectral_radius()))
    });
}

criterion_group!(benches, bench_tracker, bench_trials, bench_orientation, bench_oracles);
criterion_main!(benches);
