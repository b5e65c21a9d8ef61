use criterion::{black_box, criterion_group, criterion_main, Criterion};
use halfspace::limits::{f_limit, LimitFamily, LimitKernelSpec};
use halfspace::params::ModelParams;
use halfspace::pfaffian::{cdf_sixvertex_pfaffian, pfaffian};
use halfspace::special::qpoch_inf;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn skew(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let x = ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5;
        let y = ((j * 31 + i * 17) % 97) as f64 / 97.0 - 0.5;
        x - y
    })
}

fn bench_pfaffian(c: &mut Criterion) {
    for n in [20, 80] {
        let m = skew(n);
        c.bench_function(&format!("pfaffian {n}x{n}"), |b| b.iter(|| pfaffian(black_box(&m)).unwrap()));
    }
}

fn bench_qpoch(c: &mut Criterion) {
    let a = Complex64::new(0.3, 0.4);
    c.bench_function("qpoch_inf q=0.7", |b| b.iter(|| qpoch_inf(black_box(a), 0.7)));
}

fn bench_sixvertex_cdf(c: &mut Criterion) {
    let p = ModelParams::homogeneous(0.3, 0.2, 2.0, 0.5, 0.4, 20);
    let mut g = c.benchmark_group("sixvertex cdf");
    g.sample_size(10);
    g.bench_function("n=20, 5 points", |b| b.iter(|| cdf_sixvertex_pfaffian(20, 8, 12, black_box(&p)).unwrap()));
    g.finish();
}

fn bench_limit(c: &mut Criterion) {
    let mut g = c.benchmark_group("f_limit");
    g.sample_size(10);
    for (name, fam) in [("gse", LimitFamily::Gse), ("goe", LimitFamily::Goe), ("cross", LimitFamily::Cross { xi: 1.0 })] {
        let spec = LimitKernelSpec::new(fam).unwrap();
        g.bench_function(name, |b| b.iter(|| f_limit(black_box(-2.0), &spec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_pfaffian, bench_qpoch, bench_sixvertex_cdf, bench_limit);
criterion_main!(benches);
