use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use equiheat::group::{GroupModel, HalfInt};
use equiheat::heat::HeatKernelSeries;
use equiheat::oscillatory::{DirectIntegrator, OscillatorySpec, ProductAmplitude};
use equiheat::selberg::{
    bundle_heat_trace, selberg_sides, BundleRoute, FiniteLattice, SelbergKernel,
};
use equiheat::space::SpaceModel;
use equiheat::traces::trace_curve;
use equiheat_bench::{short_grid, su2_samples};

fn heat_series(c: &mut Criterion) {
    let model = GroupModel::su2();
    let samples = su2_samples(32);
    let mut group = c.benchmark_group("su2_heat_eval");
    for t in [0.1, 0.01, 0.001] {
        let p = HeatKernelSeries::new(&model, t).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(t), &p, |b, p| {
            b.iter(|| samples.iter().map(|g| p.eval(black_box(g))).sum::<f64>())
        });
    }
    group.finish();
}

fn traces(c: &mut Criterion) {
    let s2 = SpaceModel::s2();
    let grid = short_grid(12);
    c.bench_function("s2_trace_curve", |b| {
        b.iter(|| trace_curve(&s2, HalfInt::from_int(1), black_box(&grid)).unwrap())
    });
    c.bench_function("bundle_trace_spectral", |b| {
        b.iter(|| bundle_heat_trace(2, black_box(1e-3), BundleRoute::Spectral).unwrap())
    });
}

fn selberg(c: &mut Criterion) {
    let z4 = FiniteLattice::cyclic(4).unwrap();
    c.bench_function("selberg_z4_t0.3", |b| {
        b.iter(|| selberg_sides(&z4, SelbergKernel::Heat, black_box(0.3)).unwrap())
    });
}

fn oscillatory(c: &mut Criterion) {
    let t1 = SpaceModel::t1();
    let spec = OscillatorySpec::new(t1.clone(), ProductAmplitude::random(&t1, 3));
    let di = DirectIntegrator::new(&spec).unwrap();
    let mut group = c.benchmark_group("t1_direct_integral");
    group.sample_size(20);
    for mu in [1e-1, 1e-3] {
        group.bench_with_input(BenchmarkId::from_parameter(mu), &mu, |b, mu| {
            b.iter(|| di.eval(black_box(*mu)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, heat_series, traces, selberg, oscillatory);
criterion_main!(benches);
