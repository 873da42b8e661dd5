use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use polariton_bench::medium;
use polariton_core::analytic::{ee_closed_form, ClosedFormTerms};
use polariton_core::cerf::cerf;
use polariton_core::dynamics::{evolve_relative, evolve_schrodinger, RelativeConfig, SchrodingerConfig};
use polariton_core::greens::{support_norm, NystromOptions};
use polariton_core::spectral::{compute_spectrum, Boundary, Grid1D, SpectrumOptions};
use polariton_core::C64;

fn special_functions(c: &mut Criterion) {
    let points: Vec<C64> = (0..64).map(|k| C64::from_polar(0.3 + 0.4 * k as f64, 0.1 * k as f64)).collect();
    c.bench_function("cerf_64_points", |b| b.iter(|| points.iter().map(|&z| cerf(black_box(z)).unwrap()).sum::<C64>()));
    let terms = ClosedFormTerms::new(0.2, 1.0 / 12.0).unwrap();
    c.bench_function("closed_form_ee", |b| b.iter(|| ee_closed_form(black_box(3.0), black_box(40.0), &terms).unwrap()));
}

fn propagation(c: &mut Criterion) {
    let s = medium(0.2, -12.0);
    let mut group = c.benchmark_group("propagation");
    group.sample_size(10);
    let scalar = SchrodingerConfig {
        length: 400.0,
        n_points: 4096,
        dt: 0.05,
        t_max: 5.0,
        snapshot_times: vec![],
        ..SchrodingerConfig::default()
    };
    group.bench_function("crank_nicolson_100_steps", |b| b.iter(|| evolve_schrodinger(&s, &scalar).unwrap()));
    let relative = RelativeConfig {
        length: 400.0,
        n_points: 4096,
        dt: 0.01,
        t_max: 1.0,
        snapshot_times: vec![],
        ..RelativeConfig::default()
    };
    group.bench_function("relative_frame_100_steps", |b| b.iter(|| evolve_relative(&s, &relative).unwrap()));
    group.finish();
}

fn frequency_domain(c: &mut Criterion) {
    let s = medium(0.2, -12.0);
    let grid = Grid1D::new(100.0, 1024, Boundary::Dirichlet).unwrap();
    let opts = NystromOptions::default();
    let mut group = c.benchmark_group("frequency_domain");
    group.sample_size(10);
    group.bench_function("support_norm_1024", |b| {
        b.iter(|| support_norm(&s, &grid, black_box(C64::new(0.04, 0.0)), &opts).unwrap())
    });
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let s = medium(0.2, -12.0);
    let opts = SpectrumOptions { length: Some(200.0), n_points: Some(256), ..SpectrumOptions::default() };
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    group.bench_function("diagonalise_256", |b| b.iter(|| compute_spectrum(&s, &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, special_functions, propagation, frequency_domain, spectrum);
criterion_main!(benches);
