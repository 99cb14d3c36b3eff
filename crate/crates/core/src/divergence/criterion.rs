//! The accept/reject rule comparing posteriors with and without a candidate
//! statistic.

use serde::{Deserialize, Serialize};

use super::chi2::pearson_chi2;
use super::knn::{kl_knn, SampleCloud};
use super::ks::ks_two_sample;
use crate::error::{Error, Result};
use crate::particles::ParticleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionMode {
    /// KS for one-dimensional parameters, KL with bootstrap threshold otherwise.
    #[default]
    Auto,
    Ks,
    Chi2,
    KlBootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriterionConfig {
    pub mode: CriterionMode,
    pub p_threshold: f64,
    /// Replaces `p_threshold` for KS decisions when set.
    pub ks_threshold: Option<f64>,
    pub bootstrap_replicates: usize,
    pub k: usize,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            mode: CriterionMode::Auto,
            p_threshold: 0.01,
            ks_threshold: None,
            bootstrap_replicates: 100,
            k: 4,
        }
    }
}

impl CriterionConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("p_threshold", self.p_threshold)?;
        if let Some(t) = self.ks_threshold {
            unit("ks_threshold", t)?;
        }
        if self.bootstrap_replicates < 20 {
            return Err(Error::InvalidConfig(format!(
                "bootstrap_replicates must be >= 20, got {}",
                self.bootstrap_replicates
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        Ok(())
    }

    pub fn ks_threshold(&self) -> f64 {
        self.ks_threshold.unwrap_or(self.p_threshold)
    }

    /// The test used for parameter posteriors of dimension `dim`.
    pub fn resolve(&self, dim: usize) -> Result<CriterionMode> {
        match self.mode {
            CriterionMode::Auto if dim <= 1 => Ok(CriterionMode::Ks),
            CriterionMode::Auto => Ok(CriterionMode::KlBootstrap),
            CriterionMode::Chi2 => Err(Error::InvalidConfig(
                "chi2 applies to model posteriors only; use ks or kl_bootstrap for parameters".into(),
            )),
            m => Ok(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginal {
    Parameters,
    /// The model-index marginal over `models` competing models.
    Model { models: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub accept: bool,
    /// Deciding quantity: corrected KS p-value, chi-square p-value or KL estimate.
    pub evidence: f64,
    pub p_value: Option<f64>,
}

pub fn cloud(p: &ParticleSet) -> Result<SampleCloud> {
    let thetas: Vec<Vec<f64>> = p.particles.iter().map(|x| x.theta.clone()).collect();
    SampleCloud::from_points(&thetas)
}

/// Decides whether `with` differs from `without`.
///
/// KL mode needs the bootstrap threshold `delta`; the addition is accepted
/// when the divergence is positive and reaches it.
pub fn criterion(
    with: &ParticleSet,
    without: &ParticleSet,
    cfg: &CriterionConfig,
    marginal: Marginal,
    delta: Option<f64>,
) -> Result<Verdict> {
    if with.is_empty() || without.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if let Marginal::Model { models } = marginal {
        let (_, p) = pearson_chi2(&with.model_counts(models), &without.model_counts(models))?;
        return Ok(Verdict {
            accept: p < cfg.p_threshold,
            evidence: p,
            p_value: Some(p),
        });
    }
    let dim = with.dim().unwrap_or(0);
    let other = without.dim().unwrap_or(0);
    if dim != other {
        return Err(Error::DimensionMismatch { left: dim, right: other });
    }
    match cfg.resolve(dim)? {
        CriterionMode::Ks => {
            let min_p = (0..dim)
                .map(|c| ks_two_sample(&with.column(c), &without.column(c)).map(|r| r.1))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(1.0, f64::min);
            let corrected = (min_p * dim as f64).min(1.0);
            Ok(Verdict {
                accept: corrected < cfg.ks_threshold(),
                evidence: corrected,
                p_value: Some(corrected),
            })
        }
        CriterionMode::KlBootstrap => {
            let delta = delta.ok_or_else(|| Error::InvalidConfig("KL criterion needs a bootstrap threshold".into()))?;
            let kl = kl_knn(&cloud(with)?, &cloud(without)?, cfg.k)?;
            Ok(Verdict {
                accept: kl > 0.0 && kl >= delta,
                evidence: kl,
                p_value: None,
            })
        }
        CriterionMode::Auto | CriterionMode::Chi2 => unreachable!("resolved above"),
    }
}
