use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;
use oscmult::kernels::{wave_kernel, WaveKernelSpec};
use oscmult::special::phi;
use oscmult::transform::{roundtrip, TransformOptions};
use oscmult::SpaceParams;

fn phi_paths(c: &mut Criterion) {
    let sp = SpaceParams::complex(2).unwrap();
    let mut g = c.benchmark_group("phi");
    // small t (series), moderate, and large t (asymptotic expansion)
    for (lambda, t) in [(1.0, 0.3), (5.0, 2.0), (20.0, 12.0)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("l{lambda}_t{t}")), &(lambda, t), |b, &(l, t)| {
            b.iter(|| phi(&sp, C64::new(black_box(l), 0.0), black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let sp = SpaceParams::real(3).unwrap();
    let ts: Vec<f64> = (0..=20).map(|i| 0.2 * i as f64).collect();
    let o = TransformOptions::default();
    let f = |t: f64| C64::new((-t * t).exp(), 0.0);
    let mut g = c.benchmark_group("transform");
    g.sample_size(10);
    g.bench_function("roundtrip_gauss_h3", |b| b.iter(|| roundtrip(&sp, &f, 9.0, &ts, &o).unwrap()));
    let spec = WaveKernelSpec::new(sp, 1.0, 1.0).unwrap();
    let far: Vec<f64> = (4..=16).map(|i| 0.5 * i as f64).collect();
    g.bench_function("wave_kernel_sigma1", |b| b.iter(|| wave_kernel(&spec, &far, &o).unwrap()));
    g.finish();
}

criterion_group!(benches, phi_paths, transforms);
criterion_main!(benches);
