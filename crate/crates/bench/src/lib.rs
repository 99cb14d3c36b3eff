//! Benchmarks for the nearest-neighbour estimators and the simulators.
//! Shared fixtures live here; the benches themselves are under `benches/`.

use abcsuff_core::divergence::SampleCloud;
use abcsuff_core::rng;
use rand::Rng;

/// Standard normal-ish cloud from a fixed stream.
pub fn cloud(n: usize, dim: usize, seed: u64) -> SampleCloud {
    let mut r = rng::stream(seed, &[n as u64, dim as u64]);
    let data = (0..n * dim)
        .map(|_| (0..12).map(|_| r.random::<f64>()).sum::<f64>() - 6.0)
        .collect();
    SampleCloud::new(dim, data).expect("non-empty cloud")
}
