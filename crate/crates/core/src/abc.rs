//! Rejection ABC for single-model parameter posteriors and for the joint
//! model/parameter posterior.
//!
//! Proposal `i` of a run draws all of its randomness from the stream keyed by
//! `(seed, i)`. Proposals are simulated in fixed-size chunks in parallel and
//! then scanned in index order, so the accepted set does not depend on the
//! number of worker threads.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Variant};
use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::particles::{Particle, ParticleSet};
use crate::pool::{evaluate_subset, StatisticPool, StatisticSubset, SummaryVector};
use crate::rng::{self, tag, NoiseStream, StreamRng};

const CHUNK: u64 = 2048;

/// A simulator together with its parameter prior.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn variant(&self) -> Variant;
    fn sample_prior(&self, rng: &mut StreamRng) -> Vec<f64>;
    /// Prior density, for reporting only.
    fn prior_density(&self, theta: &[f64]) -> f64;
    fn simulate(&self, theta: &[f64], id: u64, rng: &mut StreamRng) -> Result<Dataset>;
}

/// A model with its (zero-based) index in the competing set.
#[derive(Clone)]
pub struct ModelSpec {
    pub index: usize,
    pub model: Arc<dyn Model>,
}

impl ModelSpec {
    pub fn new(index: usize, model: Arc<dyn Model>) -> Self {
        Self { index, model }
    }

    pub fn name(&self) -> &str {
        self.model.name()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("index", &self.index)
            .field("name", &self.model.name())
            .field("dim", &self.model.dim())
            .finish()
    }
}

/// Acceptance threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Epsilon {
    /// Accept proposals with distance `<= epsilon`.
    Absolute(f64),
    /// Simulate the whole budget and accept the closest fraction.
    Quantile(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    pub epsilon: Epsilon,
    /// Target number of accepted particles.
    pub particles: usize,
    pub max_proposals: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the ambient thread pool.
    pub workers: usize,
    #[serde(default)]
    pub distance: Distance,
}

impl AbcConfig {
    pub fn new(epsilon: f64, particles: usize, max_proposals: u64, seed: u64) -> Self {
        Self {
            epsilon: Epsilon::Absolute(epsilon),
            particles,
            max_proposals,
            seed,
            workers: 0,
            distance: Distance::LogSquare,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.epsilon {
            Epsilon::Absolute(e) if !(e > 0.0) => {
                return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {e}")))
            }
            Epsilon::Quantile(q) if !(q > 0.0 && q <= 1.0) => {
                return Err(Error::InvalidConfig(format!("epsilon quantile must lie in (0, 1], got {q}")))
            }
            _ => {}
        }
        if self.particles == 0 {
            return Err(Error::InvalidConfig("particle target must be positive".into()));
        }
        if self.max_proposals == 0 || (self.particles as u64) > self.max_proposals {
            return Err(Error::InvalidConfig(format!(
                "particle target {} exceeds proposal budget {}",
                self.particles, self.max_proposals
            )));
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `workers` threads (or the ambient pool for 0).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 || workers == rayon::current_num_threads() {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

struct Outcome {
    model: usize,
    theta: Vec<f64>,
    distance: f64,
}

/// Shared driver: `propose(i)` simulates proposal `i` and returns its outcome.
fn run<F>(cfg: &AbcConfig, propose: F) -> Result<ParticleSet>
where
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    cfg.validate()?;
    with_workers(cfg.workers, || match cfg.epsilon {
        Epsilon::Absolute(eps) => run_absolute(cfg, eps, &propose),
        Epsilon::Quantile(q) => run_quantile(cfg, q, &propose),
    })
}

fn run_absolute<F>(cfg: &AbcConfig, eps: f64, propose: &F) -> Result<ParticleSet>
where
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    let mut particles = Vec::with_capacity(cfg.particles);
    let mut min_distance = f64::INFINITY;
    let mut proposals = 0;
    let mut start = 0;
    'outer: while start < cfg.max_proposals {
        let end = (start + CHUNK).min(cfg.max_proposals);
        let outcomes: Vec<Outcome> = (start..end).into_par_iter().map(propose).collect::<Result<_>>()?;
        for (offset, o) in outcomes.into_iter().enumerate() {
            proposals = start + offset as u64 + 1;
            min_distance = min_distance.min(o.distance);
            if o.distance <= eps {
                particles.push(Particle {
                    model: o.model,
                    theta: o.theta,
                    distance: o.distance,
                });
                if particles.len() == cfg.particles {
                    break 'outer;
                }
            }
        }
        start = end;
    }
    if particles.is_empty() {
        return Err(Error::EpsilonTooTight { min_distance, proposals });
    }
    Ok(ParticleSet {
        particles,
        proposals,
        epsilon: eps,
    })
}

fn run_quantile<F>(cfg: &AbcConfig, q: f64, propose: &F) -> Result<ParticleSet>
where
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    let outcomes: Vec<Outcome> = (0..cfg.max_proposals).into_par_iter().map(propose).collect::<Result<_>>()?;
    let eps = quantile_threshold(outcomes.iter().map(|o| o.distance), q);
    let particles = outcomes
        .into_iter()
        .filter(|o| o.distance <= eps)
        .map(|o| Particle {
            model: o.model,
            theta: o.theta,
            distance: o.distance,
        })
        .collect();
    Ok(ParticleSet {
        particles,
        proposals: cfg.max_proposals,
        epsilon: eps,
    })
}

/// The `ceil(q n)`-th smallest of `distances`.
pub fn quantile_threshold(distances: impl Iterator<Item = f64>, q: f64) -> f64 {
    let mut d: Vec<f64> = distances.collect();
    if d.is_empty() {
        return f64::INFINITY;
    }
    let k = ((q * d.len() as f64).ceil() as usize).clamp(1, d.len());
    let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

fn check_variant(model: &ModelSpec, pool: &StatisticPool, subset: &StatisticSubset) -> Result<()> {
    for &i in subset.indices() {
        let stat = pool.get(i);
        if stat.variant() != model.model.variant() {
            return Err(Error::VariantMismatch {
                statistic: stat.name().to_string(),
                expected: stat.variant(),
                found: model.model.variant(),
            });
        }
    }
    Ok(())
}

fn simulate_and_score(
    model: &ModelSpec,
    pool: &StatisticPool,
    subset: &StatisticSubset,
    observed: &SummaryVector,
    distance: Distance,
    noise: NoiseStream,
    id: u64,
    rng: &mut StreamRng,
) -> Result<Outcome> {
    let theta = model.model.sample_prior(rng);
    let data = model.model.simulate(&theta, id, rng)?;
    let summary = evaluate_subset(pool, subset, &data, noise)?;
    Ok(Outcome {
        model: model.index,
        theta,
        distance: distance.between(&summary, observed)?,
    })
}

/// Rejection ABC for the parameters of one model.
pub fn abc_parameter(
    model: &ModelSpec,
    pool: &StatisticPool,
    subset: &StatisticSubset,
    observed: &SummaryVector,
    noise: NoiseStream,
    cfg: &AbcConfig,
) -> Result<ParticleSet> {
    subset.validate(pool)?;
    check_variant(model, pool, subset)?;
    run(cfg, |i| {
        let key = [tag::PROPOSAL, i];
        let mut rng = rng::stream(cfg.seed, &key);
        let id = rng::mix(cfg.seed, &key);
        simulate_and_score(model, pool, subset, observed, cfg.distance, noise, id, &mut rng)
    })
}

/// Rejection ABC over the joint model/parameter space.
///
/// `model_weights` is the model prior (uniform when `None`).
pub fn abc_joint(
    models: &[ModelSpec],
    model_weights: Option<&[f64]>,
    pool: &StatisticPool,
    subset: &StatisticSubset,
    observed: &SummaryVector,
    noise: NoiseStream,
    cfg: &AbcConfig,
) -> Result<ParticleSet> {
    if models.is_empty() {
        return Err(Error::InvalidConfig("joint ABC needs at least one model".into()));
    }
    subset.validate(pool)?;
    for m in models {
        check_variant(m, pool, subset)?;
    }
    let cumulative = cumulative_weights(models.len(), model_weights)?;
    run(cfg, |i| {
        let key = [tag::JOINT, i];
        let mut rng = rng::stream(cfg.seed, &key);
        let id = rng::mix(cfg.seed, &key);
        let u: f64 = rng.random();
        let m = cumulative.iter().position(|&c| u < c).unwrap_or(models.len() - 1);
        simulate_and_score(&models[m], pool, subset, observed, cfg.distance, noise, id, &mut rng)
    })
}

fn cumulative_weights(q: usize, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let w: Vec<f64> = match weights {
        None => vec![1.0; q],
        Some(w) if w.len() == q && w.iter().all(|&x| x >= 0.0 && x.is_finite()) && w.iter().sum::<f64>() > 0.0 => {
            w.to_vec()
        }
        Some(w) => return Err(Error::InvalidConfig(format!("bad model prior weights {w:?}"))),
    };
    let total: f64 = w.iter().sum();
    Ok(w.iter()
        .scan(0.0, |acc, &x| {
            *acc += x / total;
            Some(*acc)
        })
        .collect())
}

/// Half-count-smoothed ratio of acceptance counts, `(n1 + 1/2) / (n2 + 1/2)`.
pub fn bayes_factor_from_particles(particles: &ParticleSet, m1: usize, m2: usize) -> f64 {
    let count = |m| particles.particles.iter().filter(|p| p.model == m).count() as f64;
    (count(m1) + 0.5) / (count(m2) + 0.5)
}

/// Prior-predictive standard deviation of every pool component in distance
/// coordinates, pooled over `models` with `draws` simulations each.
///
/// Dividing by these puts statistics of very different spread on an equal
/// footing in the distance. Components without spread get scale 1.
pub fn prior_predictive_scales(
    models: &[ModelSpec],
    pool: &StatisticPool,
    draws: usize,
    seed: u64,
    noise: NoiseStream,
    distance: Distance,
) -> Result<Vec<f64>> {
    let full = pool.full_subset();
    for m in models {
        check_variant(m, pool, &full)?;
    }
    let rows: Vec<Vec<f64>> = models
        .iter()
        .flat_map(|m| (0..draws as u64).map(move |i| (m, i)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(m, i)| {
            let key = [tag::PILOT, m.index as u64, i];
            let mut rng = rng::stream(seed, &key);
            let theta = m.model.sample_prior(&mut rng);
            let data = m.model.simulate(&theta, rng::mix(seed, &key), &mut rng)?;
            let s = evaluate_subset(pool, &full, &data, noise)?;
            Ok(s.values
                .iter()
                .zip(&s.lower_bounds)
                .map(|(&v, &l)| distance.transform(v, l))
                .collect())
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    Ok((0..pool.width())
        .map(|c| {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let sd = var.sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect())
}

/// Prior-predictive simulations of one model with every pool statistic
/// evaluated, stored in transformed (distance) coordinates.
///
/// Row `i` is the proposal keyed by `(seed, model, i)`, so a table is a cache
/// of that proposal stream; any subset can be scored against it without
/// re-simulating.
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    model: usize,
    distance: Distance,
    width: usize,
    offsets: Vec<usize>,
    arities: Vec<usize>,
    lower_bounds: Vec<f64>,
    scales: Vec<f64>,
    thetas: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl ReferenceTable {
    pub fn build(
        model: &ModelSpec,
        pool: &StatisticPool,
        rows: usize,
        seed: u64,
        noise: NoiseStream,
        distance: Distance,
    ) -> Result<Self> {
        let full = pool.full_subset();
        check_variant(model, pool, &full)?;
        let lower_bounds: Vec<f64> = pool
            .statistics()
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.lower_bound(), s.arity()))
            .collect();
        let scales: Vec<f64> = pool.statistics().iter().flat_map(|s| s.scales().to_vec()).collect();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..rows as u64)
            .into_par_iter()
            .map(|i| {
                let key = [tag::TABLE, model.index as u64, i];
                let mut rng = rng::stream(seed, &key);
                let theta = model.model.sample_prior(&mut rng);
                let data = model.model.simulate(&theta, rng::mix(seed, &key), &mut rng)?;
                let s = evaluate_subset(pool, &full, &data, noise)?;
                let t = s
                    .values
                    .iter()
                    .zip(lower_bounds.iter().zip(&scales))
                    .map(|(&v, (&l, &sc))| distance.coordinate(v, l, sc))
                    .collect();
                Ok((theta, t))
            })
            .collect::<Result<_>>()?;
        let width = pool.width();
        let mut thetas = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len() * width);
        for (theta, t) in rows {
            thetas.push(theta);
            values.extend(t);
        }
        Ok(Self {
            model: model.index,
            distance,
            width,
            offsets: pool.offsets(),
            arities: pool.statistics().iter().map(|s| s.arity()).collect(),
            lower_bounds,
            scales,
            thetas,
            values,
        })
    }

    pub fn model(&self) -> usize {
        self.model
    }

    pub fn rows(&self) -> usize {
        self.thetas.len()
    }

    pub fn distance_kind(&self) -> Distance {
        self.distance
    }

    /// Distances of every row to `observed` (a summary over `subset`).
    fn distances(&self, columns: &[usize], target: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|r| {
                let row = &self.values[r * self.width..(r + 1) * self.width];
                columns
                    .iter()
                    .zip(target)
                    .map(|(&c, &t)| {
                        let d = row[c] - t;
                        d * d
                    })
                    .sum()
            })
            .collect()
    }

    fn columns(&self, subset: &StatisticSubset) -> Vec<usize> {
        subset
            .indices()
            .iter()
            .flat_map(|&i| self.offsets[i]..self.offsets[i] + self.arities[i])
            .collect()
    }
}

/// Rejection ABC against precomputed tables.
///
/// Rows are visited interleaved across tables (row 0 of every table, then row
/// 1, ...), so with equally sized tables the model prior is uniform and the
/// particle cap does not favour any model.
pub fn abc_tables(
    tables: &[&ReferenceTable],
    subset: &StatisticSubset,
    observed: &SummaryVector,
    epsilon: Epsilon,
    cap: usize,
) -> Result<ParticleSet> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidConfig("no reference tables".into()))?;
    let columns = first.columns(subset);
    if columns.len() != observed.len() {
        return Err(Error::LengthMismatch {
            left: columns.len(),
            right: observed.len(),
        });
    }
    let target: Vec<f64> = observed
        .values
        .iter()
        .zip(&columns)
        .map(|(&v, &c)| first.distance.coordinate(v, first.lower_bounds[c], first.scales[c]))
        .collect();
    let distances: Vec<Vec<f64>> = tables.par_iter().map(|t| t.distances(&columns, &target)).collect();
    let eps = match epsilon {
        Epsilon::Absolute(e) => e,
        Epsilon::Quantile(q) => quantile_threshold(distances.iter().flatten().copied(), q),
    };
    let rows = tables.iter().map(|t| t.rows()).max().unwrap_or(0);
    let mut particles = Vec::new();
    let mut proposals = 0u64;
    let mut min_distance = f64::INFINITY;
    'scan: for r in 0..rows {
        for (t, d) in tables.iter().zip(&distances) {
            let Some(&dist) = d.get(r) else { continue };
            proposals += 1;
            min_distance = min_distance.min(dist);
            if dist <= eps {
                particles.push(Particle {
                    model: t.model,
                    theta: t.thetas[r].clone(),
                    distance: dist,
                });
                if particles.len() == cap {
                    break 'scan;
                }
            }
        }
    }
    if particles.is_empty() {
        return Err(Error::EpsilonTooTight { min_distance, proposals });
    }
    Ok(ParticleSet {
        particles,
        proposals,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::ks::ks_two_sample;
    use crate::models::gaussian::{gaussian_models, gaussian_pool, GaussianPairSpec};
    use crate::distance::shifted_log;

    fn setup() -> (Vec<ModelSpec>, StatisticPool, Dataset) {
        let spec = GaussianPairSpec::default();
        let models = gaussian_models(&spec);
        let pool = gaussian_pool();
        let mut rng = rng::stream(5, &[tag::OBSERVED]);
        let data = models[0].model.simulate(&[0.5], 99, &mut rng).unwrap();
        (models, pool, data)
    }

    #[test]
    fn huge_epsilon_returns_prior_draws() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let subset = pool.subset_by_names(&["mean"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let mut passes = 0;
        for seed in 0..4 {
            let cfg = AbcConfig::new(1e12, 500, 10_000, seed);
            let ps = abc_parameter(&models[0], &pool, &subset, &obs, noise, &cfg).unwrap();
            assert_eq!(ps.accepted(), 500);
            assert_eq!(ps.proposals, 500);
            let mut rng = rng::stream(seed + 100, &[]);
            let prior: Vec<f64> = (0..2000).map(|_| models[0].model.sample_prior(&mut rng)[0]).collect();
            if ks_two_sample(&ps.column(0), &prior).unwrap().1 > 0.01 {
                passes += 1;
            }
        }
        assert!(passes >= 3, "{passes}/4 seeds passed");
    }

    #[test]
    fn acceptance_is_monotone_in_epsilon() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let subset = pool.subset_by_names(&["mean", "S2"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        // A target equal to the budget forces both runs over the same proposals.
        let tight = AbcConfig::new(0.05, 3000, 3000, 8);
        let loose = AbcConfig::new(0.2, 3000, 3000, 8);
        let a = abc_parameter(&models[0], &pool, &subset, &obs, noise, &tight).unwrap();
        let b = abc_parameter(&models[0], &pool, &subset, &obs, noise, &loose).unwrap();
        assert!(a.accepted() <= b.accepted());
        for p in &a.particles {
            assert!(b.particles.contains(p));
        }
    }

    #[test]
    fn identical_across_worker_counts() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let subset = pool.subset_by_names(&["mean"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let mut cfg = AbcConfig::new(0.1, 200, 100_000, 3);
        cfg.workers = 1;
        let a = abc_parameter(&models[0], &pool, &subset, &obs, noise, &cfg).unwrap();
        cfg.workers = 3;
        let b = abc_parameter(&models[0], &pool, &subset, &obs, noise, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.proposals >= a.accepted() as u64);
        assert_eq!(a.acceptance_rate(), a.accepted() as f64 / a.proposals as f64);
    }

    #[test]
    fn tight_epsilon_reports_minimum_distance() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let subset = pool.full_subset();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let cfg = AbcConfig::new(1e-12, 10, 200, 3);
        match abc_parameter(&models[0], &pool, &subset, &obs, noise, &cfg) {
            Err(Error::EpsilonTooTight { min_distance, proposals }) => {
                assert!(min_distance > 1e-12);
                assert_eq!(proposals, 200);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_model_joint_is_all_model_zero() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let subset = pool.subset_by_names(&["mean"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let cfg = AbcConfig::new(0.1, 300, 100_000, 3);
        let ps = abc_joint(&models[..1], None, &pool, &subset, &obs, noise, &cfg).unwrap();
        assert_eq!(ps.model_posterior(1), vec![1.0]);
    }

    #[test]
    fn identical_models_split_evenly() {
        let (models, pool, data) = setup();
        let twins = vec![models[0].clone(), ModelSpec::new(1, models[0].model.clone())];
        let noise = NoiseStream::new(1);
        let subset = pool.subset_by_names(&["mean", "S2"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let cfg = AbcConfig::new(0.1, 1000, 1_000_000, 4);
        let ps = abc_joint(&twins, None, &pool, &subset, &obs, noise, &cfg).unwrap();
        let c = ps.model_counts(2);
        // 99% binomial interval around n/2.
        let n = ps.accepted() as f64;
        let half = 2.576 * (n * 0.25).sqrt();
        assert!((c[0] as f64 - n / 2.0).abs() <= half, "{c:?}");
    }

    #[test]
    fn bayes_factor_smoothing() {
        let mk = |a: usize, b: usize| ParticleSet {
            particles: (0..a + b)
                .map(|i| Particle {
                    model: usize::from(i >= a),
                    theta: vec![0.0],
                    distance: 0.0,
                })
                .collect(),
            proposals: (a + b) as u64,
            epsilon: 1.0,
        };
        assert_eq!(bayes_factor_from_particles(&mk(250, 250), 0, 1), 1.0);
        assert_eq!(bayes_factor_from_particles(&mk(500, 0), 0, 1), 1001.0);
    }

    #[test]
    fn quantile_mode_accepts_fraction() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let subset = pool.subset_by_names(&["mean"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let mut cfg = AbcConfig::new(1.0, 1, 1000, 4);
        cfg.epsilon = Epsilon::Quantile(0.05);
        let ps = abc_parameter(&models[0], &pool, &subset, &obs, noise, &cfg).unwrap();
        assert_eq!(ps.accepted(), 50);
    }

    #[test]
    fn scaled_pool_has_unit_spread() {
        let models = gaussian_models(&GaussianPairSpec::default());
        let pool = gaussian_pool();
        let noise = NoiseStream::new(4);
        let scales = prior_predictive_scales(&models, &pool, 2000, 8, noise, Distance::LogSquare).unwrap();
        assert!(scales.iter().all(|&s| s > 0.0));
        let scaled = pool.with_scales(&scales).unwrap();
        let again = prior_predictive_scales(&models, &scaled, 2000, 8, noise, Distance::LogSquare).unwrap();
        // Scales are estimated before scaling, so the same draws give the same spread.
        assert_eq!(scales, again);
        let a = evaluate_subset(&scaled, &scaled.full_subset(), &models[0].model.simulate(&[1.0], 1, &mut rng::stream(1, &[1])).unwrap(), noise).unwrap();
        let b = evaluate_subset(&pool, &pool.full_subset(), &models[0].model.simulate(&[1.0], 1, &mut rng::stream(1, &[1])).unwrap(), noise).unwrap();
        let c = evaluate_subset(&pool, &pool.full_subset(), &models[0].model.simulate(&[2.0], 2, &mut rng::stream(1, &[2])).unwrap(), noise).unwrap();
        let mut c_scaled = c.clone();
        c_scaled.scales = scales.clone();
        let manual: f64 = (0..5)
            .map(|i| ((shifted_log(b.values[i], 0.0) - shifted_log(c.values[i], 0.0)) / scales[i]).powi(2))
            .sum();
        assert!((Distance::LogSquare.between(&a, &c_scaled).unwrap() - manual).abs() < 1e-12);
    }

    #[test]
    fn tables_match_streamed_distances() {
        let (models, pool, data) = setup();
        let noise = NoiseStream::new(1);
        let table = ReferenceTable::build(&models[0], &pool, 500, 9, noise, Distance::LogSquare).unwrap();
        let subset = pool.subset_by_names(&["S2", "mean"]).unwrap();
        let obs = evaluate_subset(&pool, &subset, &data, noise).unwrap();
        let ps = abc_tables(&[&table], &subset, &obs, Epsilon::Absolute(f64::INFINITY), 500).unwrap();
        for (r, p) in ps.particles.iter().enumerate() {
            let key = [tag::TABLE, 0, r as u64];
            let mut rng = rng::stream(9, &key);
            let theta = models[0].model.sample_prior(&mut rng);
            let sim = models[0].model.simulate(&theta, rng::mix(9, &key), &mut rng).unwrap();
            let s = evaluate_subset(&pool, &subset, &sim, noise).unwrap();
            let d = Distance::LogSquare.between(&s, &obs).unwrap();
            assert_eq!(p.theta, theta);
            assert!((p.distance - d).abs() < 1e-12);
        }
    }
}
