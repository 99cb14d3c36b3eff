//! End to end through the public API: simulate, persist, reload, infer.

use abcsuff_core::divergence::ks_two_sample;
use abcsuff_core::io::{read_dataset, write_dataset};
use abcsuff_core::models::gaussian::{conjugate_posterior, gaussian_models, gaussian_pool, GaussianPairSpec};
use abcsuff_core::{abc_joint, abc_parameter, evaluate_subset, rng, AbcConfig, NoiseStream};
use rand_distr::{Distribution, Normal};

#[test]
fn reloaded_gaussian_data_gives_conjugate_posterior() {
    let spec = GaussianPairSpec::default();
    let models = gaussian_models(&spec);
    let truth = models[0].model.simulate(&[0.5], 9, &mut rng::stream(9, &[0])).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("observed.txt");
    write_dataset(&path, &truth).unwrap();
    let data = read_dataset(&path, 9).unwrap();
    let y = data.as_real_vector().unwrap();
    assert_eq!(y, truth.as_real_vector().unwrap());

    let pool = gaussian_pool();
    let noise = NoiseStream::new(3);
    let subset = pool.subset_by_names(&["mean"]).unwrap();
    let observed = evaluate_subset(&pool, &subset, &data, noise).unwrap();
    let particles =
        abc_parameter(&models[0], &pool, &subset, &observed, noise, &AbcConfig::new(0.001, 500, 20_000_000, 4)).unwrap();
    assert_eq!(particles.accepted(), 500);

    let (m, v) = conjugate_posterior(y, spec.sigma1, spec.a);
    let normal = Normal::new(m, v.sqrt()).unwrap();
    let mut r = rng::stream(5, &[0]);
    let exact: Vec<f64> = (0..5000).map(|_| normal.sample(&mut r)).collect();
    let (_, p) = ks_two_sample(&particles.column(0), &exact).unwrap();
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn joint_statistics_identify_the_generating_model() {
    let models = gaussian_models(&GaussianPairSpec::default());
    let pool = gaussian_pool();
    let noise = NoiseStream::new(1);
    let subset = pool.subset_by_names(&["mean", "S2"]).unwrap();
    for (truth, seed) in [(0, 11), (1, 12)] {
        let data = models[truth].model.simulate(&[0.5], seed, &mut rng::stream(seed, &[0])).unwrap();
        let observed = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let particles =
            abc_joint(&models, None, &pool, &subset, &observed, noise, &AbcConfig::new(0.1, 1000, 2_000_000, seed)).unwrap();
        let posterior = particles.model_posterior(models.len());
        assert!(posterior[truth] > 0.8, "truth {truth}: {posterior:?}");
    }
}

/// Greedy path run to the end of the pool (the library stops at `epsilon_stop`).
#[test]
fn greedy_prefixes_approach_the_full_pool() {
    use abcsuff_core::divergence::{entropy_knn, kl_knn, SampleCloud};
    use abcsuff_core::StatisticSubset;

    let models = gaussian_models(&GaussianPairSpec::default());
    let pool = gaussian_pool();
    let data = models[0].model.simulate(&[0.5], 21, &mut rng::stream(21, &[0])).unwrap();
    let noise = NoiseStream::new(2);
    let abc = AbcConfig::new(0.1, 500, 2_000_000, 6);
    let posterior = |s: &[usize]| {
        let s = StatisticSubset(s.to_vec());
        let observed = evaluate_subset(&pool, &s, &data, noise).unwrap();
        let p = abc_parameter(&models[0], &pool, &s, &observed, noise, &abc).unwrap();
        SampleCloud::from_scalars(&p.column(0)).unwrap()
    };
    let argmax = |scores: Vec<(usize, f64)>| scores.into_iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;

    let mut path = vec![argmax((0..pool.len()).map(|i| (i, -entropy_knn(&posterior(&[i]), 4).unwrap())).collect())];
    while path.len() < pool.len() {
        let without = posterior(&path);
        let scores = (0..pool.len())
            .filter(|i| !path.contains(i))
            .map(|i| (i, kl_knn(&posterior(&[path.clone(), vec![i]].concat()), &without, 4).unwrap()))
            .collect();
        path.push(argmax(scores));
    }
    let full = posterior(&(0..pool.len()).collect::<Vec<_>>());
    let kls: Vec<f64> = (1..=path.len()).map(|k| kl_knn(&full, &posterior(&path[..k]), 4).unwrap()).collect();
    for w in kls.windows(2) {
        assert!(w[1] <= w[0] + 0.05, "{path:?} {kls:?}");
    }
}
