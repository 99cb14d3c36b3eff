//! Bootstrap threshold for the KL criterion.

use rayon::prelude::*;

use super::criterion::cloud;
use super::knn::{kl_knn, SampleCloud};
use crate::abc::{abc_parameter, AbcConfig, ModelSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::particles::ParticleSet;
use crate::pool::{evaluate_subset, StatisticPool, StatisticSubset};
use crate::rng::{self, tag, NoiseStream};

/// `B` resampled copies of `data`; replicate `b` uses the stream `(seed, b)`.
pub fn bootstrap_datasets(data: &Dataset, replicates: usize, seed: u64) -> Result<Vec<Dataset>> {
    (0..replicates as u64)
        .map(|b| {
            let key = [tag::BOOTSTRAP, b];
            data.bootstrap(rng::mix(seed, &key), &mut rng::stream(seed, &key))
        })
        .collect()
}

/// `delta = KL(posterior_without || pooled replicate posteriors)`: how far the
/// posterior moves under resampling of the data alone.
pub fn delta_from_clouds(without: &ParticleSet, replicates: &[ParticleSet], k: usize) -> Result<f64> {
    let u = cloud(without)?;
    let dim = u.dim();
    let mut pooled = Vec::new();
    for r in replicates {
        let c = cloud(r)?;
        if c.dim() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: c.dim() });
        }
        pooled.extend((0..c.len()).flat_map(|i| c.point(i).to_vec()));
    }
    kl_knn(&u, &SampleCloud::new(dim, pooled)?, k)
}

/// Bootstrap threshold for adding statistics to `subset_without` when
/// inferring the parameters of `model` from `observed`.
///
/// Each replicate reruns rejection ABC on resampled data with the proposal
/// stream of `abc`.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_delta(
    model: &ModelSpec,
    pool: &StatisticPool,
    subset_without: &StatisticSubset,
    observed: &Dataset,
    posterior_without: &ParticleSet,
    noise: NoiseStream,
    abc: &AbcConfig,
    replicates: usize,
    k: usize,
) -> Result<f64> {
    let data = bootstrap_datasets(observed, replicates, abc.seed)?;
    let clouds = data
        .par_iter()
        .map(|d| {
            let obs = evaluate_subset(pool, subset_without, d, noise)?;
            abc_parameter(model, pool, subset_without, &obs, noise, abc)
        })
        .collect::<Result<Vec<_>>>()?;
    delta_from_clouds(posterior_without, &clouds, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::criterion::{criterion, CriterionConfig, CriterionMode, Marginal};
    use crate::models::gaussian::{gaussian_models, gaussian_pool, GaussianPairSpec};

    #[test]
    fn original_data_as_only_replicate_gives_zero() {
        let (models, pool) = (gaussian_models(&GaussianPairSpec::default()), gaussian_pool());
        let data = models[0].model.simulate(&[0.5], 1, &mut rng::stream(1, &[])).unwrap();
        let noise = NoiseStream::new(2);
        let sub = pool.subset_by_names(&["noise"]).unwrap();
        let obs = evaluate_subset(&pool, &sub, &data, noise).unwrap();
        let without = abc_parameter(&models[0], &pool, &sub, &obs, noise, &AbcConfig::new(0.1, 300, 100_000, 3)).unwrap();
        assert_eq!(delta_from_clouds(&without, std::slice::from_ref(&without), 4).unwrap(), 0.0);
    }

    #[test]
    fn sufficient_pair_beats_noise_threshold() {
        let (models, pool) = (gaussian_models(&GaussianPairSpec::default()), gaussian_pool());
        let data = models[0].model.simulate(&[0.5], 1, &mut rng::stream(2, &[])).unwrap();
        let noise = NoiseStream::new(2);
        let abc = AbcConfig::new(0.1, 300, 1_000_000, 5);
        let run = |names: &[&str]| {
            let sub = pool.subset_by_names(names).unwrap();
            let obs = evaluate_subset(&pool, &sub, &data, noise).unwrap();
            (sub.clone(), abc_parameter(&models[0], &pool, &sub, &obs, noise, &abc).unwrap())
        };
        let (sub_without, without) = run(&["noise"]);
        let (_, with) = run(&["mean", "S2"]);
        let delta = bootstrap_delta(&models[0], &pool, &sub_without, &data, &without, noise, &abc, 20, 4).unwrap();
        let cfg = CriterionConfig {
            mode: CriterionMode::KlBootstrap,
            bootstrap_replicates: 20,
            ..Default::default()
        };
        let v = criterion(&with, &without, &cfg, Marginal::Parameters, Some(delta)).unwrap();
        assert!(v.accept, "kl {} delta {delta}", v.evidence);
        let same = criterion(&without, &without, &cfg, Marginal::Parameters, Some(delta)).unwrap();
        assert!(!same.accept);
    }

    #[test]
    fn replicates_are_reproducible() {
        let d = Dataset::real_vector(0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(bootstrap_datasets(&d, 5, 9).unwrap(), bootstrap_datasets(&d, 5, 9).unwrap());
    }
}
