use abcsuff_bench::cloud;
use abcsuff_core::divergence::{entropy_knn, kl_knn};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn knn(c: &mut Criterion) {
    let mut g = c.benchmark_group("kl_knn");
    for n in [500, 2000] {
        for dim in [1, 2] {
            let u = cloud(n, dim, 1);
            let v = cloud(n, dim, 2);
            g.bench_with_input(BenchmarkId::new(format!("d{dim}"), n), &n, |b, _| {
                b.iter(|| kl_knn(&u, &v, 4).unwrap())
            });
        }
    }
    g.finish();
    let u = cloud(2000, 2, 3);
    c.bench_function("entropy_knn/d2/2000", |b| b.iter(|| entropy_knn(&u, 4).unwrap()));
}

criterion_group!(benches, knn);
criterion_main!(benches);
