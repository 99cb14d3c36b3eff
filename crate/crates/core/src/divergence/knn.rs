//! k-nearest-neighbour estimators of KL divergence and differential entropy.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// Points of common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    dim: usize,
    data: Vec<f64>,
}

impl SampleCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidDataset(format!(
                "cloud of {} values does not split into dimension {dim}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite coordinate {v}")));
        }
        Ok(Self { dim, data })
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: points.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(dim),
            });
        }
        Self::new(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Translates every point by `offset`.
    pub fn shifted(&self, offset: &[f64]) -> Self {
        let data = self
            .data
            .chunks(self.dim)
            .flat_map(|p| p.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Self { dim: self.dim, data }
    }

    fn std_devs(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|c| {
                let m = self.data.iter().skip(c).step_by(self.dim).sum::<f64>() / n;
                let v = self.data.iter().skip(c).step_by(self.dim).map(|x| (x - m).powi(2)).sum::<f64>()
                    / (n - 1.0).max(1.0);
                v.sqrt()
            })
            .collect()
    }

    /// Adds uniform noise of width `1e-9 * sd` per dimension (`1e-9` for a
    /// constant dimension) to break exact ties.
    fn jittered(&self, scale: &[f64], seed: u64) -> Self {
        let mut r = rng::stream(seed, &[tag::JITTER]);
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let s = scale[i % self.dim];
                let m = 1e-9 * if s > 0.0 { s } else { 1.0 };
                x + r.random_range(-m..=m)
            })
            .collect();
        Self { dim: self.dim, data }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance from `q` to its `k`-th nearest point of `cloud`, optionally
/// skipping index `skip`.
fn kth_distance(q: &[f64], cloud: &SampleCloud, k: usize, skip: Option<usize>) -> f64 {
    let mut best = vec![f64::INFINITY; k];
    for i in 0..cloud.len() {
        if Some(i) == skip {
            continue;
        }
        let d = sq_dist(q, cloud.point(i));
        if d < best[k - 1] {
            let mut j = k - 1;
            while j > 0 && best[j - 1] > d {
                best[j] = best[j - 1];
                j -= 1;
            }
            best[j] = d;
        }
    }
    best[k - 1].sqrt()
}

fn mean_log_kth(u: &SampleCloud, v: &SampleCloud, k: usize, self_excluded: bool) -> Option<f64> {
    let logs: Vec<f64> = (0..u.len())
        .into_par_iter()
        .map(|i| kth_distance(u.point(i), v, k, self_excluded.then_some(i)).ln())
        .collect();
    if logs.iter().any(|l| !l.is_finite()) {
        None
    } else {
        Some(logs.iter().sum::<f64>() / logs.len() as f64)
    }
}

fn check_sizes(u: &SampleCloud, v: &SampleCloud, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    if u.len() < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            got: u.len(),
        });
    }
    if v.len() < k {
        return Err(Error::TooFewPoints { needed: k, got: v.len() });
    }
    Ok(())
}

fn raw_kl(u: &SampleCloud, v: &SampleCloud, k: usize) -> Option<f64> {
    let d = u.dim() as f64;
    let cross = mean_log_kth(u, v, k, false)?;
    let own = mean_log_kth(u, u, k, true)?;
    Some((v.len() as f64 / (u.len() - 1) as f64).ln() + d * cross - d * own)
}

/// Estimate of `KL(P_u || P_v)` from samples, clamped at 0.
pub fn kl_knn(u: &SampleCloud, v: &SampleCloud, k: usize) -> Result<f64> {
    check_sizes(u, v, k)?;
    let est = match raw_kl(u, v, k) {
        Some(e) => e,
        None => {
            let scale = u.std_devs();
            let seed = rng::mix(u.len() as u64, &[v.len() as u64]);
            let (ju, jv) = (u.jittered(&scale, seed), v.jittered(&scale, seed ^ 1));
            raw_kl(&ju, &jv, k).unwrap_or(f64::INFINITY)
        }
    };
    Ok(est.max(0.0))
}

fn log_unit_ball_volume(d: f64) -> f64 {
    0.5 * d * PI.ln() - ln_gamma(1.0 + 0.5 * d)
}

/// Kozachenko-Leonenko differential entropy estimate (nats).
pub fn entropy_knn(u: &SampleCloud, k: usize) -> Result<f64> {
    check_sizes(u, u, k)?;
    let d = u.dim() as f64;
    let mean_log = match mean_log_kth(u, u, k, true) {
        Some(m) => m,
        None => {
            let scale = u.std_devs();
            let j = u.jittered(&scale, u.len() as u64);
            mean_log_kth(&j, &j, k, true).unwrap_or(f64::NEG_INFINITY)
        }
    };
    Ok(digamma(u.len() as f64) - digamma(k as f64) + log_unit_ball_volume(d) + d * mean_log)
}
