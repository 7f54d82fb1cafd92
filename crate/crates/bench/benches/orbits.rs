use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oscmult::groups::{critical_exponent_estimate, enumerate_orbit, GroupModel};
use oscmult::ModelPoint;

fn enumeration(c: &mut Criterion) {
    let x = ModelPoint::h2(0.0, 1.0).unwrap();
    let lattice = GroupModel::principal_congruence_two().unwrap();
    let schottky = GroupModel::schottky_example().unwrap();
    let mut g = c.benchmark_group("orbit");
    g.sample_size(10);
    for l in [6u32, 8, 10] {
        g.bench_with_input(BenchmarkId::new("gamma2", l), &l, |b, &l| b.iter(|| enumerate_orbit(&lattice, &x, &x, l).unwrap()));
        g.bench_with_input(BenchmarkId::new("schottky", l), &l, |b, &l| b.iter(|| enumerate_orbit(&schottky, &x, &x, l).unwrap()));
    }
    let orbit = enumerate_orbit(&lattice, &x, &x, 10).unwrap();
    g.bench_function("delta_fit_gamma2_L10", |b| b.iter(|| critical_exponent_estimate(&orbit).unwrap()));
    g.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
