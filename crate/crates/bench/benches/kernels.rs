use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use boussinesq_bench::{channel_space, solitary_problem};
use boussinesq_core::fem::{assemble_mass, assemble_stiffness};
use boussinesq_core::timestepping::{rk_step, solve_relaxation_gamma, ButcherTableau};

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for degree in [1, 2] {
        let space = channel_space(200, 8, degree);
        group.bench_with_input(BenchmarkId::new("mass", degree), &space, |b, s| {
            b.iter(|| assemble_mass(black_box(s), None))
        });
        group.bench_with_input(BenchmarkId::new("stiffness", degree), &space, |b, s| {
            b.iter(|| assemble_stiffness(black_box(s), None))
        });
    }
    group.finish();
}

fn semidiscrete(c: &mut Criterion) {
    let mut group = c.benchmark_group("semidiscrete");
    for degree in [1, 2] {
        let (ops, state) = solitary_problem(200, 8, degree);
        let load = ops.unit_load().to_vec();
        group.bench_function(BenchmarkId::new("cholesky_solve", degree), |b| {
            b.iter(|| ops.solve_operator(black_box(&load)).unwrap())
        });
        group.bench_function(BenchmarkId::new("rhs", degree), |b| b.iter(|| ops.rhs(black_box(&state)).unwrap()));
        let (de, dp) = rk_step(&ops, &state, &ButcherTableau::rk4(), 0.1).unwrap();
        group.bench_function(BenchmarkId::new("relaxation_gamma", degree), |b| {
            b.iter(|| solve_relaxation_gamma(&ops, black_box(&state), &de, &dp, 0.1).unwrap())
        });
        group.bench_function(BenchmarkId::new("rk4_step", degree), |b| {
            b.iter(|| rk_step(&ops, black_box(&state), &ButcherTableau::rk4(), 0.1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, semidiscrete);
criterion_main!(benches);
