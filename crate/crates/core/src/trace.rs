use serde::{Deserialize, Serialize};

use crate::pool::{StatisticPool, StatisticSubset};

/// Where in a selection run a decision was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "model")]
pub enum Stage {
    /// Parameter inference for one model (zero-based index).
    Parameters(usize),
    /// Model selection over the joint space.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accepted,
    Rejected,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub decision: Decision,
    pub statistic: String,
    pub stage: Stage,
    /// Criterion value (KL estimate, KS statistic, chi-square statistic or
    /// posterior entropy), absent for untested decisions.
    pub value: Option<f64>,
    pub p_value: Option<f64>,
}

/// Divergence of one candidate subset from the full pool (exhaustive search).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub subset: Vec<String>,
    pub kl: f64,
}

/// Audit record of a selection run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub events: Vec<TraceEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subset_scores: Vec<SubsetScore>,
    pub final_subset: Vec<String>,
    pub abc: AbcUsage,
}

/// Totals over every ABC run a selection performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbcUsage {
    pub runs: u64,
    pub proposals: u64,
    pub accepted: u64,
}

impl AbcUsage {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

impl std::ops::Add for AbcUsage {
    type Output = AbcUsage;
    fn add(self, o: AbcUsage) -> AbcUsage {
        AbcUsage {
            runs: self.runs + o.runs,
            proposals: self.proposals + o.proposals,
            accepted: self.accepted + o.accepted,
        }
    }
}

impl SelectionTrace {
    pub(crate) fn push(
        &mut self,
        decision: Decision,
        pool: &StatisticPool,
        index: usize,
        stage: Stage,
        value: Option<f64>,
        p_value: Option<f64>,
    ) {
        self.events.push(TraceEvent {
            decision,
            statistic: pool.get(index).name().to_string(),
            stage,
            value,
            p_value,
        });
    }

    pub(crate) fn finish(&mut self, pool: &StatisticPool, subset: &StatisticSubset) {
        self.final_subset = subset.names(pool);
    }

    /// Appends another trace's events (used when combining per-model runs).
    pub(crate) fn absorb(&mut self, other: SelectionTrace) {
        self.events.extend(other.events);
        self.subset_scores.extend(other.subset_scores);
        self.abc = self.abc + other.abc;
    }
}
