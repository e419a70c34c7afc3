//! Hot-path kernels: 3-D FFT, dealiased nonlinear term, full RK4 step, and
//! the trajectory norms. Sample sizes are small because a single n = 32 step
//! costs tens of milliseconds on one core.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;
use nsx_core::dynamics::{nonlinear_term, step, SolverConfig};
use nsx_core::fft::Fft3;
use nsx_core::norms::NormReport;
use nsx_core::{make_grid, SpectralVectorField};

fn datum(n: usize) -> SpectralVectorField {
    let grid = make_grid(n).unwrap();
    SpectralVectorField::random_divfree(grid, 7, 2.0, 1.0, grid.dealias_limit.min(4)).unwrap()
}

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft3");
    for n in [16usize, 32, 64] {
        let fft = Fft3::get(n);
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i % 13) as f64, (i % 7) as f64))
            .collect();
        group.bench_function(format!("backward_n{n}"), |b| {
            b.iter_batched(
                || data.clone(),
                |mut buf| fft.backward(&mut buf),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn bench_nonlinear(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonlinear_term");
    group.sample_size(20);
    for n in [16usize, 32] {
        let u = datum(n);
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| nonlinear_term(&u).unwrap())
        });
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk4_step");
    group.sample_size(10);
    for n in [16usize, 32] {
        let u = datum(n);
        let cfg = SolverConfig {
            nu: 1.0,
            dt: 1e-3,
            t_end: 1.0,
            record_every: 1,
        };
        group.bench_function(format!("n{n}"), |b| b.iter(|| step(&u, &cfg).unwrap()));
    }
    group.finish();
}

fn bench_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("norms");
    for n in [32usize, 64] {
        let u = datum(n);
        group.bench_function(format!("report_n{n}"), |b| {
            b.iter(|| NormReport::compute(&u, 1.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(kernels, bench_fft, bench_nonlinear, bench_step, bench_norms);
criterion_main!(kernels);
