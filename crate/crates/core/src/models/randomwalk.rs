//! Planar random walks: Brownian, persistent (correlated headings) and
//! biased (headings drawn around a preferred direction).

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::abc::{Model, ModelSpec};
use crate::data::{Dataset, Variant};
use crate::error::{Error, Result};
use crate::pool::{Statistic, StatisticPool};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WalkKind {
    Brownian { sigma: f64 },
    Persistent { sigma: f64, kappa: f64 },
    Biased { sigma: f64, phi: f64, kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub kind: WalkKind,
    pub steps: usize,
}

impl WalkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 10 {
            return Err(Error::InvalidConfig(format!("walk needs >= 10 steps, got {}", self.steps)));
        }
        let (sigma, kappa) = match self.kind {
            WalkKind::Brownian { sigma } => (sigma, 0.0),
            WalkKind::Persistent { sigma, kappa } | WalkKind::Biased { sigma, kappa, .. } => (sigma, kappa),
        };
        if !(sigma > 0.0) || !(kappa >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "walk needs sigma > 0 and kappa >= 0, got {sigma}, {kappa}"
            )));
        }
        Ok(())
    }
}

/// Von Mises draw on `(-pi, pi]` around `mu`.
///
/// Best-Fisher rejection sampler; very large concentrations fall back to the
/// wrapped normal limit where the sampler loses precision.
pub fn von_mises<R: Rng + ?Sized>(mu: f64, kappa: f64, rng: &mut R) -> f64 {
    let angle = if kappa < 1e-8 {
        rng.random_range(-PI..PI)
    } else if kappa > 1e4 {
        let z: f64 = StandardNormal.sample(rng);
        z / kappa.sqrt()
    } else {
        let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
        let r = (1.0 + rho * rho) / (2.0 * rho);
        loop {
            let u1: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + r * z) / (r + z);
            let c = kappa * (r - f);
            let u2: f64 = rng.random();
            if c * (2.0 - c) > u2 || (c / u2).ln() + 1.0 >= c {
                let u3: f64 = rng.random();
                let theta = f.clamp(-1.0, 1.0).acos();
                break if u3 > 0.5 { theta } else { -theta };
            }
        }
    };
    wrap(mu + angle)
}

fn wrap(angle: f64) -> f64 {
    let a = (angle + PI).rem_euclid(TAU) - PI;
    if a == -PI {
        PI
    } else {
        a
    }
}

pub fn simulate_walk<R: Rng + ?Sized>(spec: &WalkSpec, id: u64, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.steps + 1);
    let mut pos = [0.0, 0.0];
    points.push(pos);
    match spec.kind {
        WalkKind::Brownian { sigma } => {
            let normal = Normal::new(0.0, sigma).expect("validated sigma");
            for _ in 0..spec.steps {
                pos = [pos[0] + normal.sample(rng), pos[1] + normal.sample(rng)];
                points.push(pos);
            }
        }
        WalkKind::Persistent { sigma, kappa } => {
            let normal = Normal::new(0.0, sigma).expect("validated sigma");
            let mut heading = rng.random_range(-PI..PI);
            for step in 0..spec.steps {
                if step > 0 {
                    heading = von_mises(heading, kappa, rng);
                }
                let len = normal.sample(rng).abs();
                pos = [pos[0] + len * heading.cos(), pos[1] + len * heading.sin()];
                points.push(pos);
            }
        }
        WalkKind::Biased { sigma, phi, kappa } => {
            let normal = Normal::new(0.0, sigma).expect("validated sigma");
            for _ in 0..spec.steps {
                let heading = von_mises(phi, kappa, rng);
                let len = normal.sample(rng).abs();
                pos = [pos[0] + len * heading.cos(), pos[1] + len * heading.sin()];
                points.push(pos);
            }
        }
    }
    Dataset::trajectory(id, points)
}

fn displacements(t: &[[f64; 2]]) -> impl Iterator<Item = (f64, f64)> + '_ {
    let o = t[0];
    t.iter().map(move |p| (p[0] - o[0], p[1] - o[1]))
}

/// Mean over all points of the squared displacement from the start.
pub fn mean_square_displacement(t: &[[f64; 2]]) -> f64 {
    displacements(t).map(|(x, y)| x * x + y * y).sum::<f64>() / t.len() as f64
}

pub fn mean_displacement(t: &[[f64; 2]]) -> [f64; 2] {
    let n = t.len() as f64;
    let (sx, sy) = displacements(t).fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    [sx / n, sy / n]
}

pub fn mean_square_components(t: &[[f64; 2]]) -> [f64; 2] {
    let n = t.len() as f64;
    let (sx, sy) = displacements(t).fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + y * y));
    [sx / n, sy / n]
}

/// Net displacement over path length; 0 for a path that never moves.
pub fn straightness(t: &[[f64; 2]]) -> f64 {
    let path: f64 = t
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .sum();
    if path == 0.0 {
        return 0.0;
    }
    let (first, last) = (t[0], t[t.len() - 1]);
    ((last[0] - first[0]).hypot(last[1] - first[1]) / path).min(1.0)
}

/// Eigenvalues `(l1 >= l2)` of the gyration tensor about the centroid.
pub fn gyration_eigenvalues(t: &[[f64; 2]]) -> [f64; 2] {
    let n = t.len() as f64;
    let cx = t.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = t.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut gxx, mut gxy, mut gyy) = (0.0, 0.0, 0.0);
    for p in t {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        gxx += dx * dx;
        gxy += dx * dy;
        gyy += dy * dy;
    }
    let (gxx, gxy, gyy) = (gxx / n, gxy / n, gyy / n);
    let half_trace = 0.5 * (gxx + gyy);
    let radius = (0.5 * (gxx - gyy)).hypot(gxy);
    let l1 = half_trace + radius;
    // Recover the small root from the determinant to avoid cancellation.
    let det = (gxx * gyy - gxy * gxy).max(0.0);
    let l2 = if l1 > 0.0 { det / l1 } else { 0.0 };
    [l1, l2.min(l1)]
}

/// Lower bound used for the signed mean displacement in the log distance.
pub const DISPLACEMENT_LOWER_BOUND: f64 = -400.0;

pub fn walk_pool() -> StatisticPool {
    let tr = Variant::Trajectory;
    let traj = |d: &Dataset| -> Vec<[f64; 2]> { d.as_trajectory().expect("variant checked by the pool").to_vec() };
    let stats = vec![
        Statistic::new("S1", 1, tr, 0.0, move |d, _, out| out.push(mean_square_displacement(&traj(d)))),
        Statistic::new("S2", 2, tr, DISPLACEMENT_LOWER_BOUND, move |d, _, out| {
            out.extend(mean_displacement(&traj(d)))
        }),
        Statistic::new("S3", 2, tr, 0.0, move |d, _, out| out.extend(mean_square_components(&traj(d)))),
        Statistic::new("S4", 1, tr, 0.0, move |d, _, out| out.push(straightness(&traj(d)))),
        Statistic::new("S5", 2, tr, 0.0, move |d, _, out| out.extend(gyration_eigenvalues(&traj(d)))),
    ];
    StatisticPool::new("walk5", stats).expect("static pool is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkOptions {
    pub steps: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub kappa_max: f64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self {
            steps: 200,
            sigma_min: 0.1,
            sigma_max: 2.0,
            kappa_max: 10.0,
        }
    }
}

impl WalkOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 10 || !(self.sigma_min > 0.0 && self.sigma_min < self.sigma_max) || !(self.kappa_max > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid walk options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkFamily {
    Brownian,
    Persistent,
    Biased,
}

/// A walk family with uniform priors on its parameters.
#[derive(Debug, Clone)]
pub struct WalkModel {
    name: String,
    family: WalkFamily,
    opts: WalkOptions,
}

impl WalkModel {
    pub fn new(name: impl Into<String>, family: WalkFamily, opts: WalkOptions) -> Self {
        Self {
            name: name.into(),
            family,
            opts,
        }
    }

    /// `theta` is `(sigma)`, `(sigma, kappa)` or `(sigma, phi, kappa_b)`.
    pub fn spec(&self, theta: &[f64]) -> WalkSpec {
        let kind = match self.family {
            WalkFamily::Brownian => WalkKind::Brownian { sigma: theta[0] },
            WalkFamily::Persistent => WalkKind::Persistent {
                sigma: theta[0],
                kappa: theta[1],
            },
            WalkFamily::Biased => WalkKind::Biased {
                sigma: theta[0],
                phi: theta[1],
                kappa: theta[2],
            },
        };
        WalkSpec {
            kind,
            steps: self.opts.steps,
        }
    }

    fn ranges(&self) -> Vec<(f64, f64)> {
        let sigma = (self.opts.sigma_min, self.opts.sigma_max);
        let kappa = (0.0, self.opts.kappa_max);
        match self.family {
            WalkFamily::Brownian => vec![sigma],
            WalkFamily::Persistent => vec![sigma, kappa],
            WalkFamily::Biased => vec![sigma, (0.0, TAU), kappa],
        }
    }
}

impl Model for WalkModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.ranges().len()
    }

    fn variant(&self) -> Variant {
        Variant::Trajectory
    }

    fn sample_prior(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.ranges().into_iter().map(|(lo, hi)| rng.random_range(lo..hi)).collect()
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        self.ranges()
            .iter()
            .zip(theta)
            .map(|(&(lo, hi), &t)| if (lo..=hi).contains(&t) { 1.0 / (hi - lo) } else { 0.0 })
            .product()
    }

    fn simulate(&self, theta: &[f64], id: u64, rng: &mut StreamRng) -> Result<Dataset> {
        simulate_walk(&self.spec(theta), id, rng)
    }
}

pub const WALK_MODEL_NAMES: [&str; 3] = ["rw-brown", "rw-persist", "rw-biased"];

pub fn walk_model(name: &str, opts: &WalkOptions) -> Option<WalkModel> {
    let family = match name {
        "rw-brown" => WalkFamily::Brownian,
        "rw-persist" => WalkFamily::Persistent,
        "rw-biased" => WalkFamily::Biased,
        _ => return None,
    };
    Some(WalkModel::new(name, family, *opts))
}

pub fn walk_models(opts: &WalkOptions) -> Vec<ModelSpec> {
    WALK_MODEL_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| ModelSpec::new(i, Arc::new(walk_model(name, opts).expect("known name"))))
        .collect()
}
