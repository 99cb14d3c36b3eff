//! Statistic-selection procedures: exhaustive search, greedy forward
//! selection, stochastic selection with order-dependency pruning, and the
//! two-phase construction for model choice.

mod evaluator;
mod exhaustive;
mod greedy;
mod models;
mod stochastic;

use serde::{Deserialize, Serialize};

pub use evaluator::{AbcEvaluator, Backend, Evaluator, Target};
pub use exhaustive::{select_exhaustive, MAX_EXHAUSTIVE_WIDTH};
pub use greedy::select_greedy;
pub use models::{select_for_models, ModelSelection};
pub use stochastic::{prune_order_dependency, select_stochastic};

use crate::abc::{AbcConfig, ModelSpec};
use crate::data::Dataset;
use crate::divergence::CriterionConfig;
use crate::error::{Error, Result};
use crate::pool::{StatisticPool, StatisticSubset};
use crate::rng::{self, tag, NoiseStream};
use crate::trace::SelectionTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Exhaustive,
    Greedy,
    #[default]
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub algorithm: Algorithm,
    pub criterion: CriterionConfig,
    /// Template for every ABC run; its seed is specialised per stage.
    pub abc: AbcConfig,
    /// Greedy and exhaustive KL tolerance.
    pub epsilon_stop: f64,
    pub order_dependency: bool,
    /// Seed of the candidate shuffles.
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(abc: AbcConfig, seed: u64) -> Self {
        Self {
            algorithm: Algorithm::Stochastic,
            criterion: CriterionConfig::default(),
            abc,
            epsilon_stop: 0.05,
            order_dependency: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_stop > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_stop must be > 0, got {}",
                self.epsilon_stop
            )));
        }
        self.criterion.validate()?;
        self.abc.validate()
    }

    /// ABC settings for the stage of `model` (`None` for the joint space).
    pub fn abc_for(&self, model: Option<usize>) -> AbcConfig {
        let key = model.map_or(u64::MAX, |m| m as u64);
        AbcConfig {
            seed: rng::mix(self.abc.seed, &[tag::SUBSET, key]),
            ..self.abc.clone()
        }
    }
}

/// The observed data and evaluation settings shared by every stage.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub pool: &'a StatisticPool,
    pub observed: &'a Dataset,
    pub noise: NoiseStream,
    pub backend: Backend,
}

impl<'a> Problem<'a> {
    pub fn new(pool: &'a StatisticPool, observed: &'a Dataset, noise: NoiseStream) -> Self {
        Self {
            pool,
            observed,
            noise,
            backend: Backend::Simulate,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn parameter_evaluator(&self, model: &ModelSpec, cfg: &SelectionConfig) -> Result<AbcEvaluator<'a>> {
        AbcEvaluator::new(
            Target::Parameters(model.clone()),
            self.pool,
            self.observed,
            self.noise,
            cfg.abc_for(Some(model.index)),
            cfg.criterion,
            self.backend.clone(),
        )
    }

    pub fn joint_evaluator(&self, models: &[ModelSpec], cfg: &SelectionConfig) -> Result<AbcEvaluator<'a>> {
        AbcEvaluator::new(
            Target::Joint(models.to_vec()),
            self.pool,
            self.observed,
            self.noise,
            cfg.abc_for(None),
            cfg.criterion,
            self.backend.clone(),
        )
    }
}

/// Selects statistics for the parameters of `model` with the configured algorithm.
pub fn select_parameters(
    problem: &Problem<'_>,
    model: &ModelSpec,
    cfg: &SelectionConfig,
) -> Result<(StatisticSubset, SelectionTrace)> {
    cfg.validate()?;
    let mut ev = problem.parameter_evaluator(model, cfg)?;
    match cfg.algorithm {
        Algorithm::Exhaustive => select_exhaustive(&mut ev, problem.pool, cfg),
        Algorithm::Greedy => select_greedy(&mut ev, problem.pool, cfg),
        Algorithm::Stochastic => select_stochastic(&mut ev, problem.pool, cfg),
    }
}

/// Selects statistics for choosing among `models`.
pub fn select_models(problem: &Problem<'_>, models: &[ModelSpec], cfg: &SelectionConfig) -> Result<ModelSelection> {
    cfg.validate()?;
    let mut per: Vec<AbcEvaluator<'_>> = models
        .iter()
        .map(|m| problem.parameter_evaluator(m, cfg))
        .collect::<Result<_>>()?;
    let mut joint = problem.joint_evaluator(models, cfg)?;
    let mut refs: Vec<&mut dyn Evaluator> = per.iter_mut().map(|e| e as &mut dyn Evaluator).collect();
    select_for_models(&mut refs, &mut joint, problem.pool, cfg)
}
