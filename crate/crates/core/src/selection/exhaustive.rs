use crate::error::{Error, Result};
use crate::pool::{StatisticPool, StatisticSubset};
use crate::trace::{Decision, SelectionTrace, SubsetScore};

use super::{Evaluator, SelectionConfig};

pub const MAX_EXHAUSTIVE_WIDTH: usize = 12;

/// Scores every non-empty subset by its divergence from the full-pool
/// posterior and returns the smallest one within `epsilon_stop`.
///
/// Ties in size go to the lexicographically first sorted index list.
pub fn select_exhaustive(
    ev: &mut dyn Evaluator,
    pool: &StatisticPool,
    cfg: &SelectionConfig,
) -> Result<(StatisticSubset, SelectionTrace)> {
    let w = pool.len();
    if w > MAX_EXHAUSTIVE_WIDTH {
        return Err(Error::PoolTooWide {
            width: w,
            max: MAX_EXHAUSTIVE_WIDTH,
        });
    }
    if w == 0 {
        return Err(Error::InvalidSubset("empty pool".into()));
    }
    let mut subsets: Vec<Vec<usize>> = (1u32..1 << w)
        .map(|mask| (0..w).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort();
    let full = pool.full_subset();
    let mut trace = SelectionTrace::default();
    let mut best: Option<(usize, usize, f64)> = None;
    for (n, s) in subsets.iter().enumerate() {
        let subset = StatisticSubset(s.clone());
        let kl = match ev.kl(&full, &subset) {
            Ok(kl) => kl,
            Err(e) => {
                trace.abc = ev.usage();
                return Err(e.with_trace(&trace));
            }
        };
        trace.subset_scores.push(SubsetScore {
            subset: subset.names(pool),
            kl,
        });
        if kl <= cfg.epsilon_stop && best.is_none_or(|(_, size, _)| s.len() < size) {
            best = Some((n, s.len(), kl));
        }
    }
    // The full pool scores exactly zero against itself, so a winner exists.
    let (n, _, kl) = best.expect("full pool always qualifies");
    let chosen = StatisticSubset(subsets[n].clone());
    for &i in chosen.indices() {
        trace.push(Decision::Accepted, pool, i, ev.stage(), Some(kl), None);
    }
    trace.abc = ev.usage();
    trace.finish(pool, &chosen);
    Ok((chosen, trace))
}
