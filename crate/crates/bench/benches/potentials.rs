use std::hint::black_box;

use casimirbind_core::{
    cp_full_matsubara, cp_full_quadrature, green_free, log_grid, phase_sweep, total_potential,
    CoherentDrive, DriveState, Polarization, ScenarioConfig, ScenarioOptions, Separation, Sphere,
    ThermalEnvironment,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const LAMBDA0: f64 = 1064e-9;

fn scenario(points: usize) -> ScenarioConfig {
    let s = Sphere::silica(100e-9).unwrap();
    ScenarioConfig {
        sphere_a: s,
        sphere_b: s,
        drive: DriveState::Coherent(
            CoherentDrive::symmetric(1e10, LAMBDA0, 0.0, Polarization::Y).unwrap(),
        ),
        env: ThermalEnvironment::new(300.0).unwrap(),
        r_grid: log_grid(210e-9, 5.0 * LAMBDA0, points),
        options: ScenarioOptions::default(),
    }
}

fn green(c: &mut Criterion) {
    let sep = Separation::new([3e-7, 1e-7, -2e-7]).unwrap();
    c.bench_function("green_free", |b| {
        b.iter(|| green_free(black_box(&sep), black_box(1.77e15)))
    });
}

fn casimir_polder(c: &mut Criterion) {
    let s = Sphere::silica(100e-9).unwrap();
    let env = ThermalEnvironment::new(300.0).unwrap();
    let mut g = c.benchmark_group("cp");
    for r in [5e-9, 1e-6, 50e-6] {
        g.bench_with_input(BenchmarkId::new("matsubara", r), &r, |b, &r| {
            b.iter(|| cp_full_matsubara(&s, &s, black_box(r), &env))
        });
        g.bench_with_input(BenchmarkId::new("quadrature", r), &r, |b, &r| {
            b.iter(|| cp_full_quadrature(&s, &s, black_box(r), &env))
        });
    }
    g.finish();
}

fn landscape(c: &mut Criterion) {
    let mut g = c.benchmark_group("landscape");
    g.sample_size(10);
    let full = scenario(2000);
    g.bench_function("total_potential_2000", |b| {
        b.iter(|| total_potential(black_box(&full)))
    });
    let coarse = scenario(400);
    let phases: Vec<f64> = (0..101)
        .map(|j| std::f64::consts::TAU * j as f64 / 101.0)
        .collect();
    g.bench_function("phase_sweep_400x101", |b| {
        b.iter(|| phase_sweep(black_box(&coarse), &phases))
    });
    g.finish();
}

criterion_group!(benches, green, casimir_polder, landscape);
criterion_main!(benches);
