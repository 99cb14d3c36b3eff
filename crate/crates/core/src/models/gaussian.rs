//! Two-model Gaussian testbed with known mean prior and fixed variances.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::abc::{Model, ModelSpec};
use crate::data::{Dataset, Variant};
use crate::error::{Error, Result};
use crate::pool::{Statistic, StatisticPool};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussianPairSpec {
    pub sigma1: f64,
    pub sigma2: f64,
    /// Prior standard deviation of the mean.
    pub a: f64,
    /// Sample size.
    pub d: usize,
}

impl Default for GaussianPairSpec {
    fn default() -> Self {
        Self {
            sigma1: 0.3,
            sigma2: 0.6,
            a: 2.0,
            d: 15,
        }
    }
}

impl GaussianPairSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0 && self.a > 0.0) {
            return Err(Error::InvalidConfig(
                "gaussian sigma1, sigma2 and a must be positive".into(),
            ));
        }
        if self.d < 2 {
            return Err(Error::InvalidConfig(format!("gaussian d must be >= 2, got {}", self.d)));
        }
        Ok(())
    }
}

/// `y_1..y_d ~ N(mu, sigma^2)` with `mu ~ N(0, a^2)`.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    name: String,
    sigma: f64,
    a: f64,
    d: usize,
}

impl GaussianModel {
    pub fn new(name: impl Into<String>, sigma: f64, a: f64, d: usize) -> Self {
        Self {
            name: name.into(),
            sigma,
            a,
            d,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Model for GaussianModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        1
    }

    fn variant(&self) -> Variant {
        Variant::RealVector
    }

    fn sample_prior(&self, rng: &mut StreamRng) -> Vec<f64> {
        vec![self.a * rng.sample::<f64, _>(rand_distr::StandardNormal)]
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        let z = theta[0] / self.a;
        (-0.5 * z * z).exp() / (self.a * (2.0 * PI).sqrt())
    }

    fn simulate(&self, theta: &[f64], id: u64, rng: &mut StreamRng) -> Result<Dataset> {
        simulate_gaussian(theta[0], self.sigma, self.d, id, rng)
    }
}

pub fn simulate_gaussian<R: Rng + ?Sized>(mu: f64, sigma: f64, d: usize, id: u64, rng: &mut R) -> Result<Dataset> {
    let normal = Normal::new(mu, sigma).map_err(|e| Error::InvalidConfig(format!("normal({mu}, {sigma}): {e}")))?;
    Dataset::real_vector(id, (0..d).map(|_| normal.sample(rng)).collect())
}

/// The two competing models, indices 0 and 1.
pub fn gaussian_models(spec: &GaussianPairSpec) -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(0, Arc::new(GaussianModel::new("gauss1", spec.sigma1, spec.a, spec.d))),
        ModelSpec::new(1, Arc::new(GaussianModel::new("gauss2", spec.sigma2, spec.a, spec.d))),
    ]
}

fn values(data: &crate::data::Dataset) -> &[f64] {
    data.as_real_vector().expect("variant checked by the pool")
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn sum_sq(y: &[f64]) -> f64 {
    let m = mean(y);
    y.iter().map(|v| (v - m) * (v - m)).sum()
}

fn max(y: &[f64]) -> f64 {
    y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// mean, S2 (sum of squared deviations), range, max and a U(0,2) noise statistic.
pub fn gaussian_pool() -> StatisticPool {
    let rv = Variant::RealVector;
    let stats = vec![
        Statistic::new("mean", 1, rv, 0.0, |d, _, out| out.push(mean(values(d)))),
        Statistic::new("S2", 1, rv, 0.0, |d, _, out| out.push(sum_sq(values(d)))),
        Statistic::new("range", 1, rv, 0.0, |d, _, out| {
            let y = values(d);
            let min = y.iter().copied().fold(f64::INFINITY, f64::min);
            out.push(max(y) - min)
        }),
        Statistic::new("max", 1, rv, 0.0, |d, _, out| out.push(max(values(d)))),
        Statistic::new("noise", 1, rv, 0.0, |d, ctx, out| {
            out.push(ctx.rng(d).random_range(0.0..2.0))
        }),
    ];
    StatisticPool::new("gaussian5", stats).expect("static pool is valid")
}

/// Log marginal likelihood of `y` under `y_i ~ N(mu, sigma^2)`, `mu ~ N(0, a^2)`.
pub fn log_marginal_likelihood(y: &[f64], sigma: f64, a: f64) -> f64 {
    let d = y.len() as f64;
    let ybar = mean(y);
    let s2 = sum_sq(y);
    let var = sigma * sigma;
    -0.5 * d * (2.0 * PI).ln() - d * sigma.ln() - 0.5 * (d * a * a / var).ln_1p()
        - s2 / (2.0 * var)
        - d * ybar * ybar / (2.0 * (var + d * a * a))
}

/// `ln p(y | model 1) - ln p(y | model 2)`.
pub fn analytic_log_bayes_factor(y: &[f64], spec: &GaussianPairSpec) -> f64 {
    log_marginal_likelihood(y, spec.sigma1, spec.a) - log_marginal_likelihood(y, spec.sigma2, spec.a)
}

pub fn analytic_bayes_factor(y: &[f64], spec: &GaussianPairSpec) -> f64 {
    analytic_log_bayes_factor(y, spec).exp()
}

/// Posterior `(mean, variance)` of `mu` given `y`.
pub fn conjugate_posterior(y: &[f64], sigma: f64, a: f64) -> (f64, f64) {
    let d = y.len() as f64;
    let data_precision = d / (sigma * sigma);
    let precision = data_precision + 1.0 / (a * a);
    (mean(y) * data_precision / precision, 1.0 / precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::evaluate_subset;
    use crate::rng::{self, NoiseStream};
    use rand::SeedableRng;

    /// Composite Simpson integral of `exp(f)` over `[lo, hi]`, scaled by `exp(-shift)`.
    fn integrate_exp(f: impl Fn(f64) -> f64, lo: f64, hi: f64, shift: f64) -> f64 {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * (f(x) - shift).exp();
        }
        acc * h / 3.0
    }

    fn log_joint(y: &[f64], mu: f64, sigma: f64, a: f64) -> f64 {
        let lp = -0.5 * (mu / a).powi(2) - a.ln() - 0.5 * (2.0 * PI).ln();
        let ll: f64 = y
            .iter()
            .map(|v| -0.5 * ((v - mu) / sigma).powi(2) - sigma.ln() - 0.5 * (2.0 * PI).ln())
            .sum();
        lp + ll
    }

    /// Log evidence by quadrature around the posterior mode.
    fn quad_log_evidence(y: &[f64], sigma: f64, a: f64) -> f64 {
        let (m, v) = conjugate_posterior(y, sigma, a);
        let s = v.sqrt();
        let shift = log_joint(y, m, sigma, a);
        shift + integrate_exp(|mu| log_joint(y, mu, sigma, a), m - 14.0 * s, m + 14.0 * s, shift).ln()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pool_arithmetic() {
        let pool = gaussian_pool();
        let data = Dataset::real_vector(0, vec![1.0, 2.0, 3.0]).unwrap();
        let s = evaluate_subset(&pool, &pool.subset_by_names(&["mean", "S2", "range", "max"]).unwrap(), &data, NoiseStream::new(0)).unwrap();
        assert_eq!(s.values, vec![2.0, 2.0, 2.0, 3.0]);
        let flat = Dataset::real_vector(0, vec![5.0, 5.0, 5.0]).unwrap();
        let s = evaluate_subset(&pool, &pool.subset_by_names(&["S2", "range"]).unwrap(), &flat, NoiseStream::new(0)).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
    }

    #[test]
    fn noise_in_open_interval() {
        let pool = gaussian_pool();
        let sub = pool.subset_by_names(&["noise"]).unwrap();
        for id in 0..200 {
            let data = Dataset::real_vector(id, vec![0.0]).unwrap();
            let v = evaluate_subset(&pool, &sub, &data, NoiseStream::new(4)).unwrap().values[0];
            assert!((0.0..2.0).contains(&v));
        }
    }

    #[test]
    fn degenerate_sigma_pins_values() {
        let mut rng = rng::stream(1, &[]);
        let d = simulate_gaussian(0.7, 1e-12, 15, 0, &mut rng).unwrap();
        assert!(d.as_real_vector().unwrap().iter().all(|v| (v - 0.7).abs() < 1e-9));
    }

    #[test]
    fn simulation_is_reproducible() {
        let a = simulate_gaussian(0.0, 1.0, 15, 0, &mut rng::stream(3, &[1])).unwrap();
        let b = simulate_gaussian(0.0, 1.0, 15, 0, &mut rng::stream(3, &[1])).unwrap();
        let bits = |d: &Dataset| d.as_real_vector().unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn sample_mean_clt_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let d = simulate_gaussian(1.0, 1.0, 1_000_000, 0, &mut rng).unwrap();
        assert!((mean(d.as_real_vector().unwrap()) - 1.0).abs() < 0.005);
    }

    #[test]
    fn equal_sigmas_give_unit_factor() {
        let spec = GaussianPairSpec {
            sigma2: 0.3,
            ..Default::default()
        };
        for y in [vec![0.0, 1.0, 4.0], vec![-3.0, 2.5]] {
            assert!((analytic_bayes_factor(&y, &spec) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zeros_closed_form_and_quadrature() {
        let spec = GaussianPairSpec::default();
        let y = vec![0.0; 15];
        let (s1, s2, a, d) = (spec.sigma1, spec.sigma2, spec.a, 15.0);
        let expected = d * (s2 / s1).ln()
            + 0.5 * ((1.0 / (a * a) + d / (s2 * s2)) / (1.0 / (a * a) + d / (s1 * s1))).ln();
        let lbf = analytic_log_bayes_factor(&y, &spec);
        assert!(rel(lbf.exp(), expected.exp()) < 1e-9);
        let quad = quad_log_evidence(&y, s1, a) - quad_log_evidence(&y, s2, a);
        assert!(rel(lbf.exp(), quad.exp()) < 1e-6);
    }

    #[test]
    fn random_datasets_match_quadrature() {
        let spec = GaussianPairSpec::default();
        let model = GaussianModel::new("gauss1", spec.sigma1, spec.a, spec.d);
        for i in 0..100 {
            let mut rng = rng::stream(21, &[i]);
            let theta = model.sample_prior(&mut rng);
            let d = model.simulate(&theta, i, &mut rng).unwrap();
            let y = d.as_real_vector().unwrap();
            let lbf = analytic_log_bayes_factor(y, &spec);
            let quad = quad_log_evidence(y, spec.sigma1, spec.a) - quad_log_evidence(y, spec.sigma2, spec.a);
            // Relative error on BF = |exp(diff) - 1|.
            assert!((lbf - quad).exp_m1().abs() < 1e-6, "dataset {i}: {lbf} vs {quad}");
        }
    }

    #[test]
    fn swap_inverts_factor() {
        let spec = GaussianPairSpec::default();
        let swapped = GaussianPairSpec {
            sigma1: spec.sigma2,
            sigma2: spec.sigma1,
            ..spec
        };
        let y = vec![0.3, -0.1, 0.45, 0.2, 0.0];
        let a = analytic_bayes_factor(&y, &spec);
        let b = analytic_bayes_factor(&y, &swapped);
        assert!(rel(a * b, 1.0) < 1e-12);
    }

    #[test]
    fn flat_prior_limit() {
        let y = vec![0.2, 0.4, 0.9];
        let (m, v) = conjugate_posterior(&y, 0.5, 1e6);
        assert!(rel(m, mean(&y)) < 1e-6);
        assert!(rel(v, 0.25 / 3.0) < 1e-6);
    }

    #[test]
    fn equal_precision_average() {
        let (m, v) = conjugate_posterior(&[3.0], 2.0, 2.0);
        assert!((m - 1.5).abs() < 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn posterior_moments_match_quadrature() {
        let (sigma, a) = (0.3, 2.0);
        for i in 0..10 {
            let mut rng = rng::stream(8, &[i]);
            let y: Vec<f64> = (0..15).map(|_| 2.0 + rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let (m, v) = conjugate_posterior(&y, sigma, a);
            let s = v.sqrt();
            let shift = log_joint(&y, m, sigma, a);
            let (lo, hi) = (m - 14.0 * s, m + 14.0 * s);
            let z = integrate_exp(|mu| log_joint(&y, mu, sigma, a), lo, hi, shift);
            let m1 = integrate_exp(|mu| log_joint(&y, mu, sigma, a) + mu.abs().ln(), lo, hi, shift);
            // mu stays positive on the window, so |mu| = mu.
            assert!(lo > 0.0);
            let m2 = integrate_exp(|mu| log_joint(&y, mu, sigma, a) + 2.0 * mu.abs().ln(), lo, hi, shift);
            let qm = m1 / z;
            let qv = m2 / z - qm * qm;
            assert!(rel(qm, m) < 1e-6);
            assert!(rel(qv, v) < 1e-5);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn factor_is_permutation_invariant(mut y in prop::collection::vec(-3.0f64..3.0, 2..20), seed in any::<u64>()) {
                let spec = GaussianPairSpec::default();
                let before = analytic_log_bayes_factor(&y, &spec);
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                rand::seq::SliceRandom::shuffle(&mut y[..], &mut rng);
                let after = analytic_log_bayes_factor(&y, &spec);
                prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
            }
        }
    }
}
