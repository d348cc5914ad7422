use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use softbte_core::collision::ConservationProjector;
use softbte_core::dynamics::{picard_step, InitialData, SimulationState, StepOptions};
use softbte_core::{CollisionQuadrature, ModelParams, OutOfGrid, SpatialLayout, SphereRule, VelocityGrid};

fn setup(n: usize) -> (VelocityGrid, ModelParams) {
    (VelocityGrid::new(6.0, n).unwrap(), ModelParams::new(-1.0, 0.1).unwrap())
}

fn quadrature(n: usize) -> CollisionQuadrature {
    let (grid, p) = setup(n);
    CollisionQuadrature::new(&grid, &p, SphereRule::default(), OutOfGrid::Clamp).unwrap()
}

fn bump(quad: &CollisionQuadrature) -> Vec<f64> {
    let grid = Arc::new(quad.grid().clone());
    InitialData::Bump { amplitude: 0.3, mode: 1 }
        .build(grid, SpatialLayout::Homogeneous, 1)
        .unwrap()
        .field
        .into_values()
}

fn kernel_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_build");
    group.sample_size(10);
    for n in [8, 12] {
        let (grid, p) = setup(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| CollisionQuadrature::new(&grid, &p, SphereRule::default(), OutOfGrid::Clamp).unwrap())
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("operators");
    group.sample_size(10);
    for n in [8, 12] {
        let quad = quadrature(n);
        let f = bump(&quad);
        let h: Vec<f64> = f.iter().zip(quad.grid().mu()).map(|(f, m)| f - m).collect();
        group.bench_with_input(BenchmarkId::new("q_gain", n), &n, |b, _| {
            b.iter(|| quad.q_gain(black_box(&f), black_box(&f)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("apply_k", n), &n, |b, _| {
            b.iter(|| quad.apply_k(black_box(&h)).unwrap())
        });
    }
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let mut group = c.benchmark_group("picard_step");
    group.sample_size(10);
    for n in [8, 12] {
        let quad = quadrature(n);
        let grid = Arc::new(quad.grid().clone());
        let projector = ConservationProjector::new(&grid).unwrap();
        let field = InitialData::Bump { amplitude: 0.3, mode: 1 }
            .build(grid, SpatialLayout::Homogeneous, 1)
            .unwrap()
            .field;
        let opts = StepOptions::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter_batched(
                || SimulationState::new(field.clone()).unwrap(),
                |mut state| picard_step(&quad, Some(&projector), &mut state, 0.1, &opts).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, kernel_build, operators, stepping);
criterion_main!(benches);
