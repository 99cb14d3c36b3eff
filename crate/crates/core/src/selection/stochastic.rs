use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pool::{StatisticPool, StatisticSubset};
use crate::rng::{self, tag};
use crate::trace::{Decision, SelectionTrace, Stage};

use super::{Evaluator, SelectionConfig};

pub(crate) fn stage_key(stage: Stage) -> u64 {
    match stage {
        Stage::Parameters(m) => m as u64,
        Stage::Joint => u64::MAX,
    }
}

fn union(base: &[usize], extra: &[usize]) -> StatisticSubset {
    StatisticSubset(base.iter().chain(extra).copied().collect())
}

/// Re-tests each of `accepted` (in order) against `base + last + retained`
/// and returns the retained ones in their original order. Dropped statistics
/// are recorded as pruned.
pub(crate) fn prune_against(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    base: &[usize],
    accepted: &[usize],
    last: usize,
    trace: &mut SelectionTrace,
) -> Result<Vec<usize>> {
    if accepted.contains(&last) || base.contains(&last) {
        return Err(Error::InvalidSubset(format!("statistic {last} is already selected")));
    }
    let stage = ev.stage();
    let mut u: Vec<usize> = base.iter().copied().chain([last]).collect();
    let mut kept = Vec::new();
    for &s in accepted {
        let current = StatisticSubset(u.clone());
        let verdict = ev.test(&current.with(s), &current)?;
        if verdict.accept {
            u.push(s);
            kept.push(s);
        } else {
            trace.push(Decision::Pruned, pool, s, stage, Some(verdict.evidence), verdict.p_value);
        }
    }
    Ok(kept)
}

/// Order-dependency check after `last` was accepted on top of `accepted`.
///
/// Returns `last` followed by the retained statistics.
pub fn prune_order_dependency(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    accepted: &StatisticSubset,
    last: usize,
    trace: &mut SelectionTrace,
) -> Result<StatisticSubset> {
    let kept = prune_against(ev, pool, &[], accepted.indices(), last, trace)?;
    Ok(StatisticSubset([last].into_iter().chain(kept).collect()))
}

/// Candidate loop shared by parameter and joint-space selection.
///
/// `base` is always conditioned on and never tested or pruned. When `base` is
/// empty the first statistic is drawn at random and accepted untested. Each
/// acceptance restarts the pass over a fresh shuffle of the unselected
/// statistics; the loop ends after a pass with no acceptance.
pub(crate) fn stochastic_loop(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    cfg: &SelectionConfig,
    base: &[usize],
    trace: &mut SelectionTrace,
) -> Result<Vec<usize>> {
    let w = pool.len();
    let stage = ev.stage();
    let mut rng = rng::stream(cfg.seed, &[tag::SHUFFLE, stage_key(stage)]);
    let mut v: Vec<usize> = Vec::new();
    if base.is_empty() {
        if w == 0 {
            return Err(Error::InvalidSubset("empty pool".into()));
        }
        let first = rng.random_range(0..w);
        trace.push(Decision::Accepted, pool, first, stage, None, None);
        v.push(first);
    }
    let max_acceptances = 4 * w * w + 4;
    let mut acceptances = 0;
    loop {
        let mut candidates: Vec<usize> = (0..w).filter(|i| !v.contains(i) && !base.contains(i)).collect();
        candidates.shuffle(&mut rng);
        let mut accepted = None;
        for u in candidates {
            let without = union(base, &v);
            let verdict = ev.test(&without.with(u), &without)?;
            if verdict.accept {
                trace.push(Decision::Accepted, pool, u, stage, Some(verdict.evidence), verdict.p_value);
                accepted = Some(u);
                break;
            }
            trace.push(Decision::Rejected, pool, u, stage, Some(verdict.evidence), verdict.p_value);
        }
        let Some(u) = accepted else { break };
        if cfg.order_dependency {
            v = prune_against(ev, pool, base, &v, u, trace)?;
        }
        v.push(u);
        acceptances += 1;
        if acceptances >= max_acceptances {
            break;
        }
    }
    Ok(v)
}

/// Random first statistic, then randomized criterion-driven additions with
/// optional order-dependency pruning.
pub fn select_stochastic(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    cfg: &SelectionConfig,
) -> Result<(StatisticSubset, SelectionTrace)> {
    let mut trace = SelectionTrace::default();
    let result = stochastic_loop(ev, pool, cfg, &[], &mut trace);
    trace.abc = ev.usage();
    match result {
        Ok(v) => {
            let subset = StatisticSubset(v);
            trace.finish(pool, &subset);
            Ok((subset, trace))
        }
        Err(e) => Err(e.with_trace(&trace)),
    }
}
