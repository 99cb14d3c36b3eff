//! Statistic pools, subsets of a pool, and evaluated summary vectors.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Variant};
use crate::error::{Error, Result};
use crate::rng::{NoiseStream, StreamRng};

/// What an evaluator sees besides the dataset.
pub struct EvalContext<'a> {
    pub statistic: &'a str,
    pub noise: NoiseStream,
}

impl EvalContext<'_> {
    /// The substream reserved for this statistic on `data`.
    pub fn rng(&self, data: &Dataset) -> StreamRng {
        self.noise.rng_for(self.statistic, data.id)
    }
}

pub type EvalFn = dyn Fn(&Dataset, &EvalContext<'_>, &mut Vec<f64>) + Send + Sync;

/// One named summary statistic.
#[derive(Clone)]
pub struct Statistic {
    name: String,
    arity: usize,
    variant: Variant,
    lower_bound: f64,
    scales: Vec<f64>,
    eval: Arc<EvalFn>,
}

impl Statistic {
    /// `eval` must push exactly `arity` values. `lower_bound` is the shift
    /// anchor used by the log distance.
    pub fn new<F>(name: impl Into<String>, arity: usize, variant: Variant, lower_bound: f64, eval: F) -> Self
    where
        F: Fn(&Dataset, &EvalContext<'_>, &mut Vec<f64>) + Send + Sync + 'static,
    {
        assert!(arity > 0, "statistic arity must be positive");
        Self {
            name: name.into(),
            arity,
            variant,
            lower_bound,
            scales: vec![1.0; arity],
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn with_lower_bound(mut self, lower_bound: f64) -> Self {
        self.lower_bound = lower_bound;
        self
    }

    /// Per-component divisors applied after the distance transform (default 1).
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        assert_eq!(scales.len(), self.arity, "one scale per component");
        assert!(scales.iter().all(|&s| s > 0.0 && s.is_finite()), "scales must be positive");
        self.scales = scales;
        self
    }

    /// The same evaluator under another name (and hence another noise substream).
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Evaluates the statistic, appending its components to `out`.
    pub fn evaluate_into(&self, data: &Dataset, noise: NoiseStream, out: &mut Vec<f64>) -> Result<()> {
        if data.variant() != self.variant {
            return Err(Error::VariantMismatch {
                statistic: self.name.clone(),
                expected: self.variant,
                found: data.variant(),
            });
        }
        let start = out.len();
        let ctx = EvalContext { statistic: &self.name, noise };
        (self.eval)(data, &ctx, out);
        debug_assert_eq!(out.len() - start, self.arity, "statistic {} arity", self.name);
        if let Some(&bad) = out[start..].iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteStatistic {
                statistic: self.name.clone(),
                value: bad,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Statistic")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("variant", &self.variant)
            .field("lower_bound", &self.lower_bound)
            .field("scales", &self.scales)
            .finish()
    }
}

/// An ordered registry of uniquely named statistics.
#[derive(Debug, Clone)]
pub struct StatisticPool {
    name: String,
    statistics: Vec<Statistic>,
}

impl StatisticPool {
    pub fn new(name: impl Into<String>, statistics: Vec<Statistic>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &statistics {
            if !seen.insert(s.name.clone()) {
                return Err(Error::InvalidConfig(format!("duplicate statistic name `{}`", s.name)));
            }
        }
        Ok(Self {
            name: name.into(),
            statistics,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.statistics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statistics.is_empty()
    }

    pub fn statistics(&self) -> &[Statistic] {
        &self.statistics
    }

    pub fn get(&self, index: usize) -> &Statistic {
        &self.statistics[index]
    }

    /// Total scalar width of the pool.
    pub fn width(&self) -> usize {
        self.statistics.iter().map(Statistic::arity).sum()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.statistics.iter().position(|s| s.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.statistics.iter().map(|s| s.name.clone()).collect()
    }

    /// The subset containing every statistic, in pool order.
    pub fn full_subset(&self) -> StatisticSubset {
        StatisticSubset((0..self.len()).collect())
    }

    pub fn subset_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<StatisticSubset> {
        let indices = names
            .iter()
            .map(|n| {
                self.index_of(n.as_ref()).ok_or_else(|| Error::UnknownName {
                    kind: "statistic",
                    name: n.as_ref().to_string(),
                    available: self.names(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let subset = StatisticSubset(indices);
        subset.validate(self)?;
        Ok(subset)
    }

    /// A new pool holding the named statistics of this one, in the given order.
    pub fn restrict<S: AsRef<str>>(&self, name: impl Into<String>, names: &[S]) -> Result<StatisticPool> {
        let subset = self.subset_by_names(names)?;
        StatisticPool::new(name, subset.indices().iter().map(|&i| self.get(i).clone()).collect())
    }

    /// Offsets of each statistic's first component in a full-pool summary.
    /// Copy of the pool with per-component distance scales (length `width`).
    pub fn with_scales(&self, scales: &[f64]) -> Result<StatisticPool> {
        if scales.len() != self.width() {
            return Err(Error::LengthMismatch {
                left: scales.len(),
                right: self.width(),
            });
        }
        if let Some(s) = scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig(format!("distance scale must be positive, got {s}")));
        }
        let offsets = self.offsets();
        let statistics = self
            .statistics
            .iter()
            .zip(offsets)
            .map(|(s, o)| s.clone().with_scales(scales[o..o + s.arity()].to_vec()))
            .collect();
        Ok(StatisticPool {
            name: self.name.clone(),
            statistics,
        })
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.statistics
            .iter()
            .scan(0, |acc, s| {
                let start = *acc;
                *acc += s.arity;
                Some(start)
            })
            .collect()
    }
}

/// Ordered list of distinct pool indices.
///
/// The order records when statistics were added; evaluation results do not
/// depend on it beyond the component layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatisticSubset(pub Vec<usize>);

impl StatisticSubset {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }

    /// Copy with `index` appended (no-op if already present).
    pub fn with(&self, index: usize) -> Self {
        let mut out = self.clone();
        if !out.contains(index) {
            out.0.push(index);
        }
        out
    }

    /// Sorted copy; the cache and seed key of the subset.
    pub fn canonical(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_unstable();
        Self(v)
    }

    pub fn validate(&self, pool: &StatisticPool) -> Result<()> {
        let mut seen = HashSet::new();
        for &i in &self.0 {
            if i >= pool.len() {
                return Err(Error::InvalidSubset(format!("index {i} out of range for pool of {}", pool.len())));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidSubset(format!("index {i} repeated")));
            }
        }
        Ok(())
    }

    pub fn names(&self, pool: &StatisticPool) -> Vec<String> {
        self.0.iter().map(|&i| pool.get(i).name().to_string()).collect()
    }

    pub fn arity(&self, pool: &StatisticPool) -> usize {
        self.0.iter().map(|&i| pool.get(i).arity()).sum()
    }
}

/// Evaluated statistics of one dataset, one entry per scalar component.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryVector {
    pub values: Vec<f64>,
    /// `(statistic index, component)` of each value.
    pub keys: Vec<(usize, usize)>,
    /// Log-distance shift anchor of each value's statistic.
    pub lower_bounds: Vec<f64>,
    /// Distance divisor of each value.
    pub scales: Vec<f64>,
}

impl SummaryVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Builds an unkeyed vector (statistic `i` = component `i`) with zero lower bounds.
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        Self {
            values,
            keys: (0..n).map(|i| (i, 0)).collect(),
            lower_bounds: vec![0.0; n],
            scales: vec![1.0; n],
        }
    }

    /// Values belonging to statistic `index`.
    pub fn statistic(&self, index: usize) -> Vec<f64> {
        self.keys
            .iter()
            .zip(&self.values)
            .filter(|((s, _), _)| *s == index)
            .map(|(_, v)| *v)
            .collect()
    }
}

/// Evaluates `subset` of `pool` on `data`, concatenating outputs in subset order.
pub fn evaluate_subset(
    pool: &StatisticPool,
    subset: &StatisticSubset,
    data: &Dataset,
    noise: NoiseStream,
) -> Result<SummaryVector> {
    subset.validate(pool)?;
    let width = subset.arity(pool);
    let mut values = Vec::with_capacity(width);
    let mut keys = Vec::with_capacity(width);
    let mut lower_bounds = Vec::with_capacity(width);
    let mut scales = Vec::with_capacity(width);
    for &i in subset.indices() {
        let stat = pool.get(i);
        stat.evaluate_into(data, noise, &mut values)?;
        for c in 0..stat.arity() {
            keys.push((i, c));
            lower_bounds.push(stat.lower_bound());
            scales.push(stat.scales()[c]);
        }
    }
    Ok(SummaryVector {
        values,
        keys,
        lower_bounds,
        scales,
    })
}
