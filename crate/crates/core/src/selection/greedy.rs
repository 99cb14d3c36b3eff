use crate::error::{Error, Result};
use crate::pool::{StatisticPool, StatisticSubset};
use crate::trace::{Decision, SelectionTrace};

use super::{Evaluator, SelectionConfig};

/// Starts from the statistic with the lowest posterior entropy, then keeps
/// adding the statistic whose inclusion moves the posterior most, until no
/// addition exceeds `epsilon_stop`.
pub fn select_greedy(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    cfg: &SelectionConfig,
) -> Result<(StatisticSubset, SelectionTrace)> {
    let mut trace = SelectionTrace::default();
    let result = greedy_inner(ev, pool, cfg, &mut trace);
    trace.abc = ev.usage();
    match result {
        Ok(subset) => {
            trace.finish(pool, &subset);
            Ok((subset, trace))
        }
        Err(e) => Err(e.with_trace(&trace)),
    }
}

/// Index of the first maximum (`f64::total_cmp`), so ties go to the lowest index.
fn first_max(scores: &[(usize, f64)]) -> Option<(usize, f64)> {
    scores.iter().copied().fold(None, |best, (i, s)| match best {
        Some((_, b)) if s.total_cmp(&b).is_le() => best,
        _ => Some((i, s)),
    })
}

fn greedy_inner(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    cfg: &SelectionConfig,
    trace: &mut SelectionTrace,
) -> Result<StatisticSubset> {
    let w = pool.len();
    if w == 0 {
        return Err(Error::InvalidSubset("empty pool".into()));
    }
    let stage = ev.stage();
    let neg_entropies = (0..w)
        .map(|i| Ok((i, -ev.entropy(&StatisticSubset(vec![i]))?)))
        .collect::<Result<Vec<_>>>()?;
    let (first, neg_h) = first_max(&neg_entropies).expect("non-empty pool");
    trace.push(Decision::Accepted, pool, first, stage, Some(-neg_h), None);
    let mut v = StatisticSubset(vec![first]);
    while v.len() < w {
        let scores = (0..w)
            .filter(|&i| !v.contains(i))
            .map(|i| Ok((i, ev.kl(&v.with(i), &v)?)))
            .collect::<Result<Vec<_>>>()?;
        let (best, kl) = first_max(&scores).expect("candidates remain");
        if kl <= cfg.epsilon_stop {
            trace.push(Decision::Rejected, pool, best, stage, Some(kl), None);
            break;
        }
        trace.push(Decision::Accepted, pool, best, stage, Some(kl), None);
        v = v.with(best);
    }
    Ok(v)
}
