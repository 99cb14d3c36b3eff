//! Coalescent genealogies with infinite-sites mutation.
//!
//! Time is in coalescent units: a pair of lineages in one deme coalesces at
//! rate 1, and mutations fall at rate `theta / 2` per unit branch length.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::abc::{Model, ModelSpec};
use crate::data::{Dataset, HaplotypeMatrix, Variant};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scenario {
    Constant,
    /// Population size `N(t) = N0 exp(-growth t)` backwards in time.
    ExpGrowth { growth: f64 },
    /// Two demes exchanging lineages at scaled rate `migration`; the first
    /// `split` samples start in deme 0.
    TwoIsland { migration: f64, split: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescentSpec {
    pub scenario: Scenario,
    pub n: usize,
    pub theta: f64,
}

impl CoalescentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("coalescent sample size must be >= 2, got {}", self.n)));
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidConfig(format!("theta must be > 0, got {}", self.theta)));
        }
        match self.scenario {
            Scenario::Constant => {}
            Scenario::ExpGrowth { growth } if !(growth >= 0.0) => {
                return Err(Error::InvalidConfig(format!("growth rate must be >= 0, got {growth}")))
            }
            Scenario::TwoIsland { migration, .. } if !(migration > 0.0) => {
                return Err(Error::InvalidConfig(format!("migration rate must be > 0, got {migration}")))
            }
            Scenario::TwoIsland { split, .. } if split > self.n => {
                return Err(Error::InvalidConfig(format!("deme split {split} exceeds n = {}", self.n)))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// Lineages (node ids) `a` and `b` merge into a new node.
    Coalescence { a: usize, b: usize },
    Migration { lineage: usize, from: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenealogyEvent {
    pub time: f64,
    pub kind: EventKind,
}

/// A binary genealogy: nodes `0..n` are samples, later nodes are created by
/// coalescences in time order, and the last node is the root.
#[derive(Debug, Clone)]
pub struct Genealogy {
    n: usize,
    parent: Vec<usize>,
    time: Vec<f64>,
    pub events: Vec<GenealogyEvent>,
}

impl Genealogy {
    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.time.len()
    }

    pub fn root(&self) -> usize {
        self.nodes() - 1
    }

    pub fn time(&self, node: usize) -> f64 {
        self.time[node]
    }

    /// Length of the branch above `node` (0 for the root).
    pub fn branch_length(&self, node: usize) -> f64 {
        if node == self.root() {
            0.0
        } else {
            self.time[self.parent[node]] - self.time[node]
        }
    }

    pub fn total_length(&self) -> f64 {
        (0..self.nodes()).map(|i| self.branch_length(i)).sum()
    }

    pub fn tmrca(&self) -> f64 {
        self.time[self.root()]
    }

    pub fn coalescences(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Coalescence { .. }))
            .count()
    }

    /// Sample bitset below each node.
    fn leaf_sets(&self) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        let mut sets = vec![vec![0u64; words]; self.nodes()];
        for (i, set) in sets.iter_mut().enumerate().take(self.n) {
            set[i / 64] |= 1 << (i % 64);
        }
        // Children always precede parents.
        for node in 0..self.root() {
            let p = self.parent[node];
            let (lower, upper) = sets.split_at_mut(p);
            for (parent, child) in upper[0].iter_mut().zip(&lower[node]) {
                *parent |= child;
            }
        }
        sets
    }
}

struct Builder {
    parent: Vec<usize>,
    time: Vec<f64>,
    events: Vec<GenealogyEvent>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Self {
            parent: vec![usize::MAX; n],
            time: vec![0.0; n],
            events: Vec::with_capacity(2 * n),
        }
    }

    fn merge(&mut self, a: usize, b: usize, t: f64) -> usize {
        let node = self.time.len();
        self.time.push(t);
        self.parent.push(usize::MAX);
        self.parent[a] = node;
        self.parent[b] = node;
        self.events.push(GenealogyEvent {
            time: t,
            kind: EventKind::Coalescence { a, b },
        });
        node
    }

    fn finish(self, n: usize) -> Genealogy {
        Genealogy {
            n,
            parent: self.parent,
            time: self.time,
            events: self.events,
        }
    }
}

/// Removes two distinct random entries of `active` and returns them.
fn pick_pair<R: Rng + ?Sized>(active: &mut Vec<usize>, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..active.len());
    let a = active.swap_remove(i);
    let j = rng.random_range(0..active.len());
    let b = active.swap_remove(j);
    (a, b)
}

fn panmictic<R: Rng + ?Sized>(n: usize, growth: f64, rng: &mut R) -> Genealogy {
    let mut b = Builder::new(n);
    let mut active: Vec<usize> = (0..n).collect();
    let mut t = 0.0;
    while active.len() > 1 {
        let k = active.len() as f64;
        let rate = k * (k - 1.0) / 2.0;
        let e: f64 = Exp1.sample(rng);
        t += if growth > 0.0 {
            (growth * e / (rate * (growth * t).exp())).ln_1p() / growth
        } else {
            e / rate
        };
        let (x, y) = pick_pair(&mut active, rng);
        let node = b.merge(x, y, t);
        active.push(node);
    }
    b.finish(n)
}

fn two_island<R: Rng + ?Sized>(n: usize, migration: f64, split: usize, rng: &mut R) -> Genealogy {
    let mut b = Builder::new(n);
    let mut demes: [Vec<usize>; 2] = [(0..split).collect(), (split..n).collect()];
    let mut t = 0.0;
    let per_lineage = migration / 2.0;
    while demes[0].len() + demes[1].len() > 1 {
        let pairs = |k: usize| (k * k.saturating_sub(1)) as f64 / 2.0;
        let c = [pairs(demes[0].len()), pairs(demes[1].len())];
        let m = [
            per_lineage * demes[0].len() as f64,
            per_lineage * demes[1].len() as f64,
        ];
        let total = c[0] + c[1] + m[0] + m[1];
        let e: f64 = Exp1.sample(rng);
        t += e / total;
        let mut u = rng.random::<f64>() * total;
        let mut event = 3;
        for (i, r) in [c[0], c[1], m[0], m[1]].into_iter().enumerate() {
            if u < r {
                event = i;
                break;
            }
            u -= r;
        }
        // Guard against the rounding fall-through landing on an empty class.
        if [c[0], c[1], m[0], m[1]][event] == 0.0 {
            event = (0..4).rev().find(|&i| [c[0], c[1], m[0], m[1]][i] > 0.0).unwrap_or(0);
        }
        if event < 2 {
            let (x, y) = pick_pair(&mut demes[event], rng);
            let node = b.merge(x, y, t);
            demes[event].push(node);
        } else {
            let from = event - 2;
            let to = 1 - from;
            let i = rng.random_range(0..demes[from].len());
            let lineage = demes[from].swap_remove(i);
            demes[to].push(lineage);
            b.events.push(GenealogyEvent {
                time: t,
                kind: EventKind::Migration { lineage, from, to },
            });
        }
    }
    b.finish(n)
}

pub fn simulate_genealogy<R: Rng + ?Sized>(spec: &CoalescentSpec, rng: &mut R) -> Genealogy {
    match spec.scenario {
        Scenario::Constant => panmictic(spec.n, 0.0, rng),
        Scenario::ExpGrowth { growth } => panmictic(spec.n, growth, rng),
        Scenario::TwoIsland { migration, split } => two_island(spec.n, migration, split, rng),
    }
}

/// Drops Poisson(`theta/2 * L`) mutations on `g` and returns the haplotype
/// matrix with columns ordered by mutation time (most recent first).
pub fn mutate<R: Rng + ?Sized>(g: &Genealogy, theta: f64, rng: &mut R) -> Result<HaplotypeMatrix> {
    let lengths: Vec<f64> = (0..g.nodes()).map(|i| g.branch_length(i)).collect();
    let total: f64 = lengths.iter().sum();
    let count = Poisson::new(theta / 2.0 * total)
        .map(|p| p.sample(rng) as usize)
        .unwrap_or(0);
    let cumulative: Vec<f64> = lengths
        .iter()
        .scan(0.0, |acc, &l| {
            *acc += l;
            Some(*acc)
        })
        .collect();
    let mut muts: Vec<(f64, usize)> = (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let node = cumulative.partition_point(|&c| c <= u).min(g.root() - 1);
            // Skip zero-length branches hit through rounding.
            let node = (node..g.root()).find(|&i| lengths[i] > 0.0).unwrap_or(node);
            let t = g.time(node) + rng.random::<f64>() * lengths[node];
            (t, node)
        })
        .collect();
    muts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sets = g.leaf_sets();
    let columns = muts.into_iter().map(|(_, node)| sets[node].clone()).collect();
    HaplotypeMatrix::from_columns(g.samples(), columns)
}

pub fn simulate_coalescent<R: Rng + ?Sized>(spec: &CoalescentSpec, id: u64, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let g = simulate_genealogy(spec, rng);
    Ok(Dataset::haplotypes(id, mutate(&g, spec.theta, rng)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoalescentOptions {
    pub n: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub growth: f64,
    pub migration: f64,
    /// Samples in deme 0 of the island model; `None` splits evenly.
    pub split: Option<usize>,
}

impl Default for CoalescentOptions {
    fn default() -> Self {
        Self {
            n: 100,
            theta_min: 5.0,
            theta_max: 30.0,
            growth: 0.4,
            migration: 10.0,
            split: None,
        }
    }
}

impl CoalescentOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_min > 0.0 && self.theta_min < self.theta_max) {
            return Err(Error::InvalidConfig(format!(
                "theta prior needs 0 < theta_min < theta_max, got [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        for scenario in [Scenario::Constant, self.growth_scenario(), self.island_scenario()] {
            CoalescentSpec {
                scenario,
                n: self.n,
                theta: self.theta_min,
            }
            .validate()?;
        }
        Ok(())
    }

    fn growth_scenario(&self) -> Scenario {
        Scenario::ExpGrowth { growth: self.growth }
    }

    fn island_scenario(&self) -> Scenario {
        Scenario::TwoIsland {
            migration: self.migration,
            split: self.split.unwrap_or(self.n / 2),
        }
    }
}

/// One scenario with a uniform prior on theta.
#[derive(Debug, Clone)]
pub struct CoalescentModel {
    name: String,
    scenario: Scenario,
    n: usize,
    theta_min: f64,
    theta_max: f64,
}

impl CoalescentModel {
    pub fn new(name: impl Into<String>, scenario: Scenario, opts: &CoalescentOptions) -> Self {
        Self {
            name: name.into(),
            scenario,
            n: opts.n,
            theta_min: opts.theta_min,
            theta_max: opts.theta_max,
        }
    }

    pub fn spec(&self, theta: f64) -> CoalescentSpec {
        CoalescentSpec {
            scenario: self.scenario,
            n: self.n,
            theta,
        }
    }
}

impl Model for CoalescentModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        1
    }

    fn variant(&self) -> Variant {
        Variant::HaplotypeMatrix
    }

    fn sample_prior(&self, rng: &mut StreamRng) -> Vec<f64> {
        vec![rng.random_range(self.theta_min..self.theta_max)]
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        if (self.theta_min..=self.theta_max).contains(&theta[0]) {
            1.0 / (self.theta_max - self.theta_min)
        } else {
            0.0
        }
    }

    fn simulate(&self, theta: &[f64], id: u64, rng: &mut StreamRng) -> Result<Dataset> {
        simulate_coalescent(&self.spec(theta[0]), id, rng)
    }
}

pub const COALESCENT_MODEL_NAMES: [&str; 3] = ["coal-const", "coal-growth", "coal-island"];

pub fn coalescent_model(name: &str, opts: &CoalescentOptions) -> Option<CoalescentModel> {
    let scenario = match name {
        "coal-const" => Scenario::Constant,
        "coal-growth" => opts.growth_scenario(),
        "coal-island" => opts.island_scenario(),
        _ => return None,
    };
    Some(CoalescentModel::new(name, scenario, opts))
}

/// Constant size, exponential growth and two-island models, indices 0..3.
pub fn coalescent_models(opts: &CoalescentOptions) -> Vec<ModelSpec> {
    COALESCENT_MODEL_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| ModelSpec::new(i, Arc::new(coalescent_model(name, opts).expect("known name"))))
        .collect()
}
