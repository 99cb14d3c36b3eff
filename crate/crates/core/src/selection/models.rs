use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{StatisticPool, StatisticSubset};
use crate::trace::{AbcUsage, SelectionTrace, Stage};

use super::stochastic::stochastic_loop;
use super::{Evaluator, SelectionConfig};

/// Outcome of statistic selection for model choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSelection {
    /// Union of the per-model subsets plus the joint-space additions.
    pub subset: StatisticSubset,
    pub per_model: Vec<StatisticSubset>,
    /// Union of the per-model subsets, in first-selected order.
    pub union: StatisticSubset,
    pub trace: SelectionTrace,
}

/// Per-model stochastic selection, then joint-space additions tested on the
/// model-index marginal.
///
/// `per_model[m]` must evaluate parameter posteriors of model `m`; `joint`
/// must evaluate the joint space. The per-model union is always kept.
pub fn select_for_models(
    per_model: &mut [&mut dyn Evaluator],
    joint: &mut dyn Evaluator,
    pool: &StatisticPool,
    cfg: &SelectionConfig,
) -> Result<ModelSelection> {
    if per_model.len() < 2 {
        return Err(Error::InvalidConfig("model selection needs at least two models".into()));
    }
    if joint.stage() != Stage::Joint {
        return Err(Error::InvalidConfig("joint evaluator must work on the joint space".into()));
    }
    let mut trace = SelectionTrace::default();
    let mut subsets = Vec::with_capacity(per_model.len());
    let mut union: Vec<usize> = Vec::new();
    let usage = |per_model: &[&mut dyn Evaluator], joint: &dyn Evaluator| {
        per_model.iter().fold(joint.usage(), |acc, e| acc + e.usage())
    };
    for ev in per_model.iter_mut() {
        let mut t = SelectionTrace::default();
        let result = stochastic_loop(&mut **ev, pool, cfg, &[], &mut t);
        t.abc = AbcUsage::default();
        trace.absorb(t);
        match result {
            Ok(v) => {
                for &i in &v {
                    if !union.contains(&i) {
                        union.push(i);
                    }
                }
                subsets.push(StatisticSubset(v));
            }
            Err(e) => {
                trace.abc = usage(per_model, joint);
                return Err(e.with_trace(&trace));
            }
        }
    }
    let result = stochastic_loop(joint, pool, cfg, &union, &mut trace);
    trace.abc = usage(per_model, joint);
    match result {
        Ok(extra) => {
            let subset = StatisticSubset(union.iter().chain(&extra).copied().collect());
            trace.finish(pool, &subset);
            Ok(ModelSelection {
                subset,
                per_model: subsets,
                union: StatisticSubset(union),
                trace,
            })
        }
        Err(e) => Err(e.with_trace(&trace)),
    }
}
