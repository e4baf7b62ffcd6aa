use cgframe_core::controlled::reconstruct;
use cgframe_core::matcore::herm_eig;
use cgframe_core::recon::{equilibrating_pair, frame_algorithm, worst_case_vector};
use cgframe_core::{build_system, generate, verify, GeneratorKind, IterConfig, Suite, Tolerances};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn eig_and_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for n in [4usize, 16, 64] {
        let file = generate(GeneratorKind::Generic, n, 8, 1).unwrap();
        let inst = file.build(Tolerances::default()).unwrap();
        let s = inst.system.frame_operator().clone();
        group.bench_with_input(BenchmarkId::new("herm_eig", n), &s, |b, s| {
            b.iter(|| herm_eig(black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("build_system", n), &inst, |b, inst| {
            b.iter(|| {
                build_system(inst.system.family().clone(), inst.system.pair().clone()).unwrap()
            })
        });
        let f = worst_case_vector(&inst.system);
        group.bench_with_input(BenchmarkId::new("reconstruct", n), &inst, |b, inst| {
            b.iter(|| reconstruct(&inst.system, black_box(&f)).unwrap())
        });
    }
    group.finish();
}

fn frame_algorithm_conditioning(c: &mut Criterion) {
    let mut group = c.benchmark_group("frame_algorithm");
    group.sample_size(10);
    for kappa in [1e2, 1e3, 1e4] {
        let inst = generate(GeneratorKind::IllConditioned { kappa }, 16, 4, 0)
            .unwrap()
            .build(Tolerances::default())
            .unwrap();
        let sys = &inst.system;
        let controlled = build_system(
            sys.family().clone(),
            equilibrating_pair(sys.family()).unwrap(),
        )
        .unwrap();
        for (label, target) in [("plain", sys), ("equilibrated", &controlled)] {
            let g = target.frame_operator().mul_vec(&worst_case_vector(target));
            let b = target.bounds();
            group.bench_with_input(BenchmarkId::new(label, kappa), &g, |bench, g| {
                bench.iter(|| {
                    frame_algorithm(
                        target.frame_operator(),
                        b.lower,
                        b.upper,
                        g,
                        &IterConfig::default(),
                    )
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn full_suite(c: &mut Criterion) {
    let inst = generate(GeneratorKind::DualPair, 8, 4, 2)
        .unwrap()
        .build(Tolerances::default())
        .unwrap();
    c.bench_function("verify_all_dual_pair_8x4", |b| {
        b.iter(|| verify(black_box(&inst), Suite::All, "bench"))
    });
}

criterion_group!(
    benches,
    eig_and_build,
    frame_algorithm_conditioning,
    full_suite
);
criterion_main!(benches);
