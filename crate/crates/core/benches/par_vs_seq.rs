//! Compares the rayon-parallel entry points against their sequential twins
//! on the three hot loops: all-pairs assessment, axiom counterexample search,
//! and Mallows sweep evaluation.
//!
//! Run with `cargo bench -p conflict-core`. Building with
//! `--no-default-features` makes the "parallel" functions sequential too,
//! which is the fallback this suite exists to quantify.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use conflict_core::axioms::{self, AxiomId};
use conflict_core::experiments;
use conflict_core::generators::{generate, GeneratorConfig, GeneratorKind, MallowsCenters};
use conflict_core::metrics;
use conflict_core::rules::RuleId;

fn big_profile() -> conflict_core::Profile {
    generate(&GeneratorConfig {
        kind: GeneratorKind::ImpartialCulture,
        n: 2000,
        m: 20,
        seed: 99,
    })
    .expect("valid config")
}

fn bench_assess_all_pairs(c: &mut Criterion) {
    let profile = big_profile();
    let mut group = c.benchmark_group("assess_all_pairs");
    group.bench_function("parallel", |b| {
        b.iter(|| metrics::assess_all_pairs(black_box(&profile)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| metrics::assess_all_pairs_seq(black_box(&profile)))
    });
    group.finish();
}

fn bench_counterexample_search(c: &mut Criterion) {
    let gen = GeneratorConfig {
        kind: GeneratorKind::ImpartialCulture,
        n: 5,
        m: 4,
        seed: 0,
    };
    let budget = 400;
    let mut group = c.benchmark_group("search_reverse_stability");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            axioms::search_counterexample(
                AxiomId::ReverseStability,
                RuleId::MaxNash,
                black_box(&gen),
                budget,
                7,
            )
            .expect("search runs")
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let cfg = GeneratorConfig { seed: 7, ..gen.clone() };
            axioms::search_counterexample_seq(
                AxiomId::ReverseStability,
                RuleId::MaxNash,
                budget,
                |trial| {
                    conflict_core::generators::generate_stream(black_box(&cfg), trial)
                        .expect("valid config")
                },
            )
            .expect("search runs")
        })
    });
    group.finish();
}

fn bench_mallows_sweep(c: &mut Criterion) {
    let psis = [0.1, 0.5, 0.9];
    let mut group = c.benchmark_group("mallows_sweep");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            experiments::mallows_sweep(
                black_box(&psis),
                MallowsCenters::Identity,
                200,
                10,
                8,
                13,
            )
            .expect("sweep runs")
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            experiments::mallows_sweep_seq(
                black_box(&psis),
                MallowsCenters::Identity,
                200,
                10,
                8,
                13,
            )
            .expect("sweep runs")
        })
    });
    group.finish();
}

fn tuned() -> Criterion {
    Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(5))
}

criterion_group! {
    name = benches;
    config = tuned();
    targets = bench_assess_all_pairs, bench_counterexample_search, bench_mallows_sweep
}
criterion_main!(benches);
