use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use caustica::circular::{circular_transform_quadrature_with, probe_normal_kernel, transform_multiplier, Interpolation};
use caustica::field::{make_gaussian, Grid2D};
use caustica::sphere::{harmonic_field, random_axes, transform_circles};
use caustica::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn quadrature(c: &mut Criterion) {
    let grid = Grid2D::new(128, 16.0).unwrap();
    let f = make_gaussian(grid, [0.0, 0.0], 1.0);
    let mut g = c.benchmark_group("quadrature_n128_m256");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| circular_transform_quadrature_with(black_box(&f), 256, Interpolation::Cubic, exec).unwrap())
        });
    }
    g.finish();
}

fn multiplier(c: &mut Criterion) {
    let grid = Grid2D::new(512, 16.0).unwrap();
    let f = make_gaussian(grid, [0.0, 0.0], 1.0);
    let t = transform_multiplier();
    let mut g = c.benchmark_group("multiplier_n512");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| t.apply_with(black_box(&f), exec))
        });
    }
    g.finish();
}

fn kernel_probe(c: &mut Criterion) {
    let grid = Grid2D::new(512, 8.0).unwrap();
    let radii: Vec<f64> = (1..=16).map(|i| 0.1 * i as f64).collect();
    let mut g = c.benchmark_group("normal_kernel_probe_n512");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| probe_normal_kernel(grid, 0.05, black_box(&radii), exec).unwrap())
        });
    }
    g.finish();
}

fn sphere_circles(c: &mut Criterion) {
    let f = harmonic_field(32, 64, &[(3, 1, 1.0), (2, 0, 0.5)]).unwrap();
    let axes = random_axes(0, 64);
    let mut g = c.benchmark_group("sphere_circles_64");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| transform_circles(black_box(&f), &axes, 128, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, quadrature, multiplier, kernel_probe, sphere_circles);
criterion_main!(benches);
