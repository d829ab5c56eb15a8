use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lipfree::isometry::find_isometry;
use lipfree::molecule::Molecule;
use lipfree::norm::{dual_norm, norm_certificate, primal_norm};
use lipfree::pipeline::phi0;
use lipfree::space::{FiniteMetricSpace, MetricCode, PointedSpace};

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 + rng.gen_range(0..=8) as f64 / 8.0;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let code = MetricCode {
        n,
        d,
        labels: None,
        basepoint: None,
    };
    FiniteMetricSpace::from_code(&code, 1e-9).unwrap()
}

fn random_molecule(rng: &mut ChaCha8Rng, n: usize) -> Molecule {
    let mut entries = BTreeMap::new();
    for x in 0..n {
        let c = rng.gen_range(-8..=8) as f64 / 4.0;
        if c != 0.0 {
            entries.insert(x, c);
        }
    }
    if entries.is_empty() {
        entries.insert(0, 1.0);
        entries.insert(n - 1, -1.0);
    }
    Molecule::new(entries).unwrap()
}

fn bench_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm");
    for &n in &[4usize, 8, 12] {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let space = random_space(&mut rng, n);
        let pointed = PointedSpace::new(space.clone(), 0).unwrap();
        let m = random_molecule(&mut rng, n);
        group.bench_with_input(BenchmarkId::new("primal", n), &n, |b, _| {
            b.iter(|| primal_norm(&m, &space).unwrap().value)
        });
        group.bench_with_input(BenchmarkId::new("dual", n), &n, |b, _| {
            b.iter(|| dual_norm(&m, &pointed).unwrap().value)
        });
        group.bench_with_input(BenchmarkId::new("certificate", n), &n, |b, _| {
            b.iter(|| norm_certificate(&m, &pointed, 1e-9).unwrap().value)
        });
    }
    group.finish();
}

fn bench_isometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("isometry");
    for &n in &[6usize, 8] {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = random_space(&mut rng, n);
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[i][j] = x.dist(order[i], order[j]);
            }
        }
        let code = MetricCode {
            n,
            d,
            labels: None,
            basepoint: None,
        };
        let y = FiniteMetricSpace::from_code(&code, 1e-9).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| find_isometry(&x, &y, 1e-9).unwrap())
        });
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    for &n in &[4usize, 6, 8] {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let code = random_space(&mut rng, n).to_code();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| phi0(&code, 1e-9).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_norms, bench_isometry, bench_pipeline);
criterion_main!(benches);
