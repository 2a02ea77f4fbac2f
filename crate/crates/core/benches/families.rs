//! Sequential vs parallel execution of the pairwise family checks.
//!
//! Run with `cargo bench -p isoclinic-core`. Without the `parallel` feature
//! both variants take the sequential path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isoclinic_core::construct::{graph_projection, kestelman_family};
use isoclinic_core::isoclinic::isoclinic_family_check_with;
use isoclinic_core::kl::kl_general_check_with;
use isoclinic_core::linalg::{projection_from_subspace, ComplexMatrix};
use isoclinic_core::mum::{mum_check_with, mum_from_construction};
use isoclinic_core::sampling::{haar_unitary, random_subspace};
use isoclinic_core::{Execution, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn graph_family(m: usize) -> Vec<ComplexMatrix> {
    let tol = Tolerance::default();
    kestelman_family(m)
        .unwrap()
        .members
        .iter()
        .map(|a| graph_projection(a, 2, &tol).unwrap())
        .collect()
}

fn bench_isoclinic(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("isoclinic_family");
    group.sample_size(10);
    for m in [8, 16] {
        let ps = graph_family(m);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, m), &ps, |b, ps| {
                b.iter(|| isoclinic_family_check_with(ps, &tol, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_kl(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 32;
    let p_c = projection_from_subspace(&random_subspace(&mut rng, n, 2));
    // generic unitaries fail the off-diagonal conditions, but every pair is
    // still evaluated before the verdict
    let ops: Vec<ComplexMatrix> = (0..12).map(|_| haar_unitary(&mut rng, n)).collect();
    let mut group = c.benchmark_group("kl_general");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| kl_general_check_with(&ops, &p_c, &tol, exec).is_ok())
        });
    }
    group.finish();
}

fn bench_mum(c: &mut Criterion) {
    let tol = Tolerance::default();
    let family = mum_from_construction(3, 3).unwrap();
    let mut group = c.benchmark_group("mum_family");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| mum_check_with(&family.measurements, &tol, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_isoclinic, bench_kl, bench_mum);
criterion_main!(benches);
