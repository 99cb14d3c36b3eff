//! Posterior estimation and criterion evaluation for subsets of one pool.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::abc::{abc_joint, abc_parameter, abc_tables, AbcConfig, Epsilon, ModelSpec, ReferenceTable};
use crate::data::Dataset;
use crate::divergence::criterion::cloud;
use crate::divergence::{
    bootstrap_datasets, criterion, delta_from_clouds, entropy_knn, kl_knn, CriterionConfig, CriterionMode,
    Marginal, Verdict,
};
use crate::error::{Error, Result};
use crate::particles::ParticleSet;
use crate::pool::{evaluate_subset, StatisticPool, StatisticSubset};
use crate::rng::{self, tag, NoiseStream};
use crate::trace::{AbcUsage, Stage};

/// What the selection algorithms need from posterior estimation.
pub trait Evaluator {
    fn stage(&self) -> Stage;

    /// Criterion comparing the posteriors given `with` and given `without`.
    fn test(&mut self, with: &StatisticSubset, without: &StatisticSubset) -> Result<Verdict>;

    /// Estimated `KL(p(. | from) || p(. | to))`.
    fn kl(&mut self, from: &StatisticSubset, to: &StatisticSubset) -> Result<f64>;

    /// Estimated posterior entropy given `subset`.
    fn entropy(&mut self, subset: &StatisticSubset) -> Result<f64>;

    /// ABC work performed so far (cache hits excluded).
    fn usage(&self) -> AbcUsage;
}

/// Where posterior samples come from.
#[derive(Clone, Default)]
pub enum Backend {
    /// Fresh rejection ABC per subset.
    #[default]
    Simulate,
    /// Reference tables, one per model index.
    Tables(Arc<Vec<ReferenceTable>>),
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Simulate => f.write_str("Simulate"),
            Backend::Tables(t) => write!(f, "Tables({} tables)", t.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Target {
    Parameters(ModelSpec),
    Joint(Vec<ModelSpec>),
}

impl Target {
    fn models(&self) -> &[ModelSpec] {
        match self {
            Target::Parameters(m) => std::slice::from_ref(m),
            Target::Joint(ms) => ms,
        }
    }
}

/// Evaluator backed by rejection ABC.
///
/// Every subset of a stage is scored on the same proposal stream (common
/// random numbers), and each posterior is computed once per canonical subset.
/// With reference tables and a quantile epsilon, the threshold is calibrated
/// once on the full pool and then applied to every subset.
pub struct AbcEvaluator<'a> {
    target: Target,
    stage: Stage,
    pool: &'a StatisticPool,
    observed: &'a Dataset,
    noise: NoiseStream,
    abc: AbcConfig,
    criterion: CriterionConfig,
    backend: Backend,
    cache: HashMap<Vec<usize>, Arc<ParticleSet>>,
    deltas: HashMap<Vec<usize>, f64>,
    usage: AbcUsage,
}

impl<'a> AbcEvaluator<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        target: Target,
        pool: &'a StatisticPool,
        observed: &'a Dataset,
        noise: NoiseStream,
        abc: AbcConfig,
        criterion: CriterionConfig,
        backend: Backend,
    ) -> Result<Self> {
        abc.validate()?;
        criterion.validate()?;
        let stage = match &target {
            Target::Parameters(m) => Stage::Parameters(m.index),
            Target::Joint(ms) if ms.len() >= 2 => Stage::Joint,
            Target::Joint(_) => return Err(Error::InvalidConfig("model selection needs at least two models".into())),
        };
        let mut ev = Self {
            target,
            stage,
            pool,
            observed,
            noise,
            abc,
            criterion,
            backend,
            cache: HashMap::new(),
            deltas: HashMap::new(),
            usage: AbcUsage::default(),
        };
        if let (Backend::Tables(_), Epsilon::Quantile(_)) = (&ev.backend, ev.abc.epsilon) {
            let full = ev.pool.full_subset();
            let obs = evaluate_subset(ev.pool, &full, ev.observed, ev.noise)?;
            let calibrated = abc_tables(&ev.tables()?, &full, &obs, ev.abc.epsilon, usize::MAX)?.epsilon;
            ev.abc.epsilon = Epsilon::Absolute(calibrated);
        }
        Ok(ev)
    }

    /// The epsilon actually applied (calibrated for table quantile mode).
    pub fn epsilon(&self) -> Epsilon {
        self.abc.epsilon
    }

    fn tables(&self) -> Result<Vec<&ReferenceTable>> {
        let Backend::Tables(all) = &self.backend else {
            return Ok(Vec::new());
        };
        self.target
            .models()
            .iter()
            .map(|m| {
                all.iter()
                    .find(|t| t.model() == m.index)
                    .ok_or_else(|| Error::InvalidConfig(format!("no reference table for model {}", m.name())))
            })
            .collect()
    }

    fn run(&self, data: &Dataset, subset: &StatisticSubset) -> Result<ParticleSet> {
        let obs = evaluate_subset(self.pool, subset, data, self.noise)?;
        match &self.backend {
            Backend::Tables(_) => abc_tables(&self.tables()?, subset, &obs, self.abc.epsilon, self.abc.particles),
            Backend::Simulate => match &self.target {
                Target::Parameters(m) => abc_parameter(m, self.pool, subset, &obs, self.noise, &self.abc),
                Target::Joint(ms) => abc_joint(ms, None, self.pool, subset, &obs, self.noise, &self.abc),
            },
        }
    }

    /// Posterior given `subset` on the observed data.
    pub fn posterior(&mut self, subset: &StatisticSubset) -> Result<Arc<ParticleSet>> {
        let key = subset.canonical();
        if let Some(p) = self.cache.get(&key.0) {
            return Ok(p.clone());
        }
        let p = Arc::new(self.run(self.observed, &key)?);
        self.record(&p);
        self.cache.insert(key.0, p.clone());
        Ok(p)
    }

    fn delta(&mut self, without: &StatisticSubset) -> Result<f64> {
        let key = without.canonical();
        if let Some(&d) = self.deltas.get(&key.0) {
            return Ok(d);
        }
        let posterior = self.posterior(&key)?;
        let seed = rng::mix(self.abc.seed, &[tag::BOOTSTRAP]);
        let replicates = bootstrap_datasets(self.observed, self.criterion.bootstrap_replicates, seed)?;
        let this = &*self;
        let clouds = replicates
            .par_iter()
            .map(|d| this.run(d, &key))
            .collect::<Result<Vec<_>>>()?;
        for c in &clouds {
            self.record(c);
        }
        let d = delta_from_clouds(&posterior, &clouds, self.criterion.k)?;
        self.deltas.insert(key.0, d);
        Ok(d)
    }

    fn record(&mut self, p: &ParticleSet) {
        self.usage = self.usage
            + AbcUsage {
                runs: 1,
                proposals: p.proposals,
                accepted: p.accepted() as u64,
            };
    }

    fn parameter_cloud_check(&self) -> Result<()> {
        match self.target {
            Target::Parameters(_) => Ok(()),
            Target::Joint(_) => Err(Error::InvalidConfig(
                "parameter divergences are undefined over the joint model space".into(),
            )),
        }
    }
}

impl Evaluator for AbcEvaluator<'_> {
    fn stage(&self) -> Stage {
        self.stage
    }

    fn test(&mut self, with: &StatisticSubset, without: &StatisticSubset) -> Result<Verdict> {
        let w = self.posterior(with)?;
        let wo = self.posterior(without)?;
        let (marginal, delta) = match &self.target {
            Target::Joint(ms) => (Marginal::Model { models: ms.len() }, None),
            Target::Parameters(m) => {
                let delta = match self.criterion.resolve(m.dim())? {
                    CriterionMode::KlBootstrap => Some(self.delta(without)?),
                    _ => None,
                };
                (Marginal::Parameters, delta)
            }
        };
        criterion(&w, &wo, &self.criterion, marginal, delta)
    }

    fn kl(&mut self, from: &StatisticSubset, to: &StatisticSubset) -> Result<f64> {
        self.parameter_cloud_check()?;
        let a = cloud(&*self.posterior(from)?)?;
        let b = cloud(&*self.posterior(to)?)?;
        kl_knn(&a, &b, self.criterion.k)
    }

    fn entropy(&mut self, subset: &StatisticSubset) -> Result<f64> {
        self.parameter_cloud_check()?;
        let c = cloud(&*self.posterior(subset)?)?;
        entropy_knn(&c, self.criterion.k)
    }

    fn usage(&self) -> AbcUsage {
        self.usage
    }
}
