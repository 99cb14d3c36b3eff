use abcsuff_core::models::coalescent::{simulate_coalescent, CoalescentSpec, Scenario};
use abcsuff_core::models::gaussian::{gaussian_pool, simulate_gaussian};
use abcsuff_core::models::popgen::popgen_pool;
use abcsuff_core::models::randomwalk::{simulate_walk, walk_pool, WalkKind, WalkSpec};
use abcsuff_core::{evaluate_subset, rng, NoiseStream};
use criterion::{criterion_group, criterion_main, Criterion};

fn simulators(c: &mut Criterion) {
    let mut r = rng::stream(1, &[0]);
    c.bench_function("gaussian/d15", |b| b.iter(|| simulate_gaussian(0.5, 0.3, 15, 0, &mut r).unwrap()));

    for (label, scenario) in [
        ("constant", Scenario::Constant),
        ("growth", Scenario::ExpGrowth { growth: 0.4 }),
        ("island", Scenario::TwoIsland { migration: 10.0, split: 50 }),
    ] {
        let spec = CoalescentSpec { scenario, n: 100, theta: 15.0 };
        c.bench_function(&format!("coalescent/{label}/n100"), |b| {
            b.iter(|| simulate_coalescent(&spec, 0, &mut r).unwrap())
        });
    }

    let walk = WalkSpec {
        kind: WalkKind::Biased { sigma: 1.0, phi: 0.5, kappa: 2.0 },
        steps: 200,
    };
    c.bench_function("walk/biased/200", |b| b.iter(|| simulate_walk(&walk, 0, &mut r).unwrap()));

    let noise = NoiseStream::new(1);
    for (label, pool, data) in [
        ("gaussian5", gaussian_pool(), simulate_gaussian(0.5, 0.3, 15, 0, &mut r).unwrap()),
        (
            "popgen11",
            popgen_pool(),
            simulate_coalescent(&CoalescentSpec { scenario: Scenario::Constant, n: 100, theta: 15.0 }, 0, &mut r).unwrap(),
        ),
        ("walk5", walk_pool(), simulate_walk(&walk, 0, &mut r).unwrap()),
    ] {
        let full = pool.full_subset();
        c.bench_function(&format!("pool/{label}"), |b| {
            b.iter(|| evaluate_subset(&pool, &full, &data, noise).unwrap())
        });
    }
}

criterion_group!(benches, simulators);
criterion_main!(benches);
