//! Name-based lookup of built-in models and statistic pools.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::abc::ModelSpec;
use crate::error::{Error, Result};
use crate::models::coalescent::{coalescent_model, CoalescentOptions, COALESCENT_MODEL_NAMES};
use crate::models::gaussian::{gaussian_pool, GaussianModel, GaussianPairSpec};
use crate::models::popgen::popgen_pool;
use crate::models::randomwalk::{walk_model, walk_pool, WalkOptions, WALK_MODEL_NAMES};
use crate::pool::StatisticPool;

pub const GAUSSIAN_MODEL_NAMES: [&str; 2] = ["gauss1", "gauss2"];
pub const POOL_NAMES: [&str; 3] = ["gaussian5", "popgen11", "walk5"];

/// Per-family options used when resolving model names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    pub gaussian: GaussianPairSpec,
    pub coalescent: CoalescentOptions,
    pub walk: WalkOptions,
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        self.gaussian.validate()?;
        self.coalescent.validate()?;
        self.walk.validate()
    }
}

pub fn model_names() -> Vec<&'static str> {
    GAUSSIAN_MODEL_NAMES
        .iter()
        .chain(&COALESCENT_MODEL_NAMES)
        .chain(&WALK_MODEL_NAMES)
        .copied()
        .collect()
}

/// Resolves `name` to a model carrying the given model index.
pub fn model(name: &str, index: usize, opts: &ModelOptions) -> Result<ModelSpec> {
    let g = &opts.gaussian;
    let m: Arc<dyn crate::abc::Model> = match name {
        "gauss1" => Arc::new(GaussianModel::new(name, g.sigma1, g.a, g.d)),
        "gauss2" => Arc::new(GaussianModel::new(name, g.sigma2, g.a, g.d)),
        _ => {
            if let Some(c) = coalescent_model(name, &opts.coalescent) {
                Arc::new(c)
            } else if let Some(w) = walk_model(name, &opts.walk) {
                Arc::new(w)
            } else {
                return Err(unknown("model", name, model_names()));
            }
        }
    };
    Ok(ModelSpec::new(index, m))
}

/// Resolves a list of names; indices follow list order.
pub fn models<S: AsRef<str>>(names: &[S], opts: &ModelOptions) -> Result<Vec<ModelSpec>> {
    names.iter().enumerate().map(|(i, n)| model(n.as_ref(), i, opts)).collect()
}

pub fn pool(name: &str) -> Result<StatisticPool> {
    match name {
        "gaussian5" => Ok(gaussian_pool()),
        "popgen11" => Ok(popgen_pool()),
        "walk5" => Ok(walk_pool()),
        _ => Err(unknown("pool", name, POOL_NAMES.to_vec())),
    }
}

fn unknown(kind: &'static str, name: &str, available: Vec<&str>) -> Error {
    Error::UnknownName {
        kind,
        name: name.to_string(),
        available: available.into_iter().map(String::from).collect(),
    }
}
