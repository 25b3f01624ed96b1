use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ncpoisson::foliation::{self, FormDegree, GroupoidKernel};
use ncpoisson::rng::seeded;
use ncpoisson::suites::{SuiteConfig, KERNEL_BANDWIDTH};
use ncpoisson::torus::{canonical_poisson, default_theta};
use ncpoisson::{Algebra, Cochain, TorusElement};

fn hochschild(c: &mut Criterion) {
    let mut group = c.benchmark_group("hochschild_differential");
    let mut rng = seeded(1);
    for (name, alg) in [("m2", Algebra::matrix(2)), ("s3", Algebra::symmetric_group_s3())] {
        for k in 1..=2 {
            let f = Cochain::random(&alg, k, &mut rng).unwrap();
            group.bench_with_input(BenchmarkId::new(name, k), &f, |b, f| b.iter(|| black_box(f.differential().unwrap())));
        }
    }
    group.finish();
}

fn torus(c: &mut Criterion) {
    let mut group = c.benchmark_group("torus");
    let mut rng = seeded(2);
    for n in [8, 16, 32] {
        let a = TorusElement::random(default_theta(), n, n / 2, &mut rng);
        let b = TorusElement::random(default_theta(), n, n / 2, &mut rng);
        group.bench_with_input(BenchmarkId::new("multiply", n), &(a.clone(), b.clone()), |bch, (a, b)| {
            bch.iter(|| black_box(a.multiply(b).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("poisson", n), &(a, b), |bch, (a, b)| {
            bch.iter(|| black_box(canonical_poisson(a, b).unwrap()))
        });
    }
    group.finish();
}

fn foliation_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("foliation");
    group.sample_size(10);
    let config = SuiteConfig::default();
    for n in [8, 16] {
        let model = config.model(n).unwrap();
        let mut rng = seeded(3);
        let k1 = GroupoidKernel::random(&model, FormDegree::Scalar, KERNEL_BANDWIDTH, &mut rng);
        let k2 = GroupoidKernel::random(&model, FormDegree::Scalar, KERNEL_BANDWIDTH, &mut rng);
        group.bench_with_input(BenchmarkId::new("convolve", n), &(k1.clone(), k2.clone()), |b, (k1, k2)| {
            b.iter(|| black_box(k1.convolve(k2).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("bracket", n), &(k1, k2), |b, (k1, k2)| {
            b.iter(|| black_box(foliation::poisson_bracket_kernels(k1, k2).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, hochschild, torus, foliation_kernels);
criterion_main!(benches);
