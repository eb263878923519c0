use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use annspec::auditors::sector_counterexample;
use annspec::heatkernel::{annulus_heat_spectrum, kernel_eval};
use annspec::perturb::box_perturbation_audit;
use annspec::radial::solve_radial;
use annspec::spectral2d::{solve_polar, PolarDomain2D};
use annspec::specfun::{bessel_j_log, first_positive_zero, BesselOrder};
use annspec_bench::{notched_box, thin_annulus};

fn radial(c: &mut Criterion) {
    c.bench_function("solve_radial n=3 N=4096", |b| b.iter(|| solve_radial(3, 1.0, black_box(2.0), 0.0, 4096, 1).unwrap()));
    c.bench_function("solve_radial n=2 N=1024 k=4", |b| b.iter(|| solve_radial(2, 1.0, black_box(1.5), 1.0, 1024, 4).unwrap()));
}

fn special_functions(c: &mut Criterion) {
    let nu = BesselOrder::new(8.0).unwrap();
    c.bench_function("bessel_j_log nu=8", |b| b.iter(|| bessel_j_log(nu, black_box(7.3)).unwrap()));
    c.bench_function("first_positive_zero nu=8", |b| b.iter(|| first_positive_zero(black_box(nu)).unwrap()));
    let mut group = c.benchmark_group("sector");
    group.sample_size(10);
    group.bench_function("beta=1/4", |b| b.iter(|| sector_counterexample(black_box(&[0.25])).unwrap()));
    group.finish();
}

fn grids(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    let annulus = PolarDomain2D::annulus(1.0, 1.3);
    group.bench_function("solve_polar 48x256", |b| b.iter(|| solve_polar(&annulus, 48, 256, 1).unwrap()));
    group.bench_function("notched box h=1/48", |b| b.iter(|| box_perturbation_audit(&notched_box(), 1.0 / 48.0).unwrap()));
    group.finish();
}

fn heat(c: &mut Criterion) {
    let spec = thin_annulus(0.1);
    let spectrum = annulus_heat_spectrum(&spec, 0.5).unwrap();
    let (x, y) = ([1.05, 0.0], [0.0, 1.02]);
    c.bench_function("annulus kernel eval t=1", |b| b.iter(|| kernel_eval(&spectrum, black_box(1.0), &x, &y).unwrap()));
}

criterion_group!(benches, radial, special_functions, grids, heat);
criterion_main!(benches);
