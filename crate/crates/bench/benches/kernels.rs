use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use weiltrace_core::fourier::{fourier_padic, fourier_padic_exact};
use weiltrace_core::global::{explicit_formula_check, find_zeros, sieve_primes};
use weiltrace_core::trace::local_trace_check;
use weiltrace_core::zeta::{z_euler_maclaurin, z_riemann_siegel};
use weiltrace_core::{
    CutoffPhi, ExactLevelFunction, LevelFunction, LogProfile, Place, PrimeTable, PvContext, UGrid, ZeroTable,
};

fn sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("sieve");
    for x in [100_000u64, 1_000_000, 10_000_000] {
        group.bench_with_input(BenchmarkId::from_parameter(x), &x, |b, &x| b.iter(|| sieve_primes(black_box(x))));
    }
    group.finish();
}

fn hardy_z(c: &mut Criterion) {
    c.bench_function("z euler-maclaurin t=100", |b| b.iter(|| z_euler_maclaurin(black_box(100.0))));
    c.bench_function("z riemann-siegel t=1e4", |b| b.iter(|| z_riemann_siegel(black_box(1e4))));
    let mut group = c.benchmark_group("find zeros");
    group.sample_size(10);
    group.bench_function("100", |b| b.iter(|| find_zeros(black_box(100)).unwrap()));
    group.finish();
}

fn padic_fourier(c: &mut Criterion) {
    let values: Vec<f64> = (0..729).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
    let f = LevelFunction::from_real(3, 3, 3, &values).unwrap();
    c.bench_function("fourier float 3^6", |b| b.iter(|| fourier_padic(black_box(&f)).unwrap()));
    let ints: Vec<i64> = values.iter().map(|&v| v as i64).collect();
    let e = ExactLevelFunction::from_integers(3, 3, 3, &ints).unwrap();
    c.bench_function("fourier exact 3^6", |b| b.iter(|| fourier_padic_exact(black_box(&e)).unwrap()));
}

fn trace_engine(c: &mut Criterion) {
    let grid = UGrid::new(20.0, 4096).unwrap();
    let g = LogProfile::gaussian(1.5, 0.4, 1.0).unwrap();
    let ctx = PvContext::real().unwrap();
    let phi = CutoffPhi::default();
    let mut group = c.benchmark_group("local trace N=4096");
    group.sample_size(20);
    group.bench_function("S={inf}", |b| b.iter(|| local_trace_check(grid, &g, &phi, &[Place::real()], &ctx).unwrap()));
    let two = [Place::real(), Place::finite(2).unwrap()];
    group.bench_function("S={inf,2}", |b| b.iter(|| local_trace_check(grid, &g, &phi, &two, &ctx).unwrap()));
    group.finish();
}

fn explicit_formula(c: &mut Criterion) {
    let zeros = ZeroTable::load(&std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/zeros_ref.txt"))
        .unwrap();
    let primes = PrimeTable::new(10_000);
    let ctx = PvContext::real().unwrap();
    let g = LogProfile::gaussian(2.0, 0.2, 1.0).unwrap();
    c.bench_function("explicit formula 100 zeros X=1e4", |b| {
        b.iter(|| explicit_formula_check(black_box(&g), &zeros, &primes, &ctx, 1e-6).unwrap())
    });
}

criterion_group!(benches, sieve, hardy_z, padic_fourier, trace_engine, explicit_formula);
criterion_main!(benches);
