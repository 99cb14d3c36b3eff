use serde::{Deserialize, Serialize};

/// One accepted `(model, parameters)` draw. Model indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub model: usize,
    pub theta: Vec<f64>,
    pub distance: f64,
}

/// Accepted draws of one ABC run, uniformly weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub proposals: u64,
    pub epsilon: f64,
}

impl ParticleSet {
    pub fn accepted(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted() as f64 / self.proposals as f64
        }
    }

    /// Accepted count per model index, for `models` models.
    pub fn model_counts(&self, models: usize) -> Vec<u64> {
        let mut counts = vec![0u64; models];
        for p in &self.particles {
            if p.model < models {
                counts[p.model] += 1;
            }
        }
        counts
    }

    /// Parameter vectors of the particles belonging to `model`.
    pub fn thetas(&self, model: usize) -> Vec<Vec<f64>> {
        self.particles
            .iter()
            .filter(|p| p.model == model)
            .map(|p| p.theta.clone())
            .collect()
    }

    /// Component `dim` of every particle's parameter vector.
    pub fn column(&self, dim: usize) -> Vec<f64> {
        self.particles.iter().map(|p| p.theta[dim]).collect()
    }

    /// Parameter dimension shared by the particles, if any.
    pub fn dim(&self) -> Option<usize> {
        self.particles.first().map(|p| p.theta.len())
    }

    /// Marginal model posterior estimate: acceptance fraction per model.
    pub fn model_posterior(&self, models: usize) -> Vec<f64> {
        let n = self.accepted().max(1) as f64;
        self.model_counts(models).iter().map(|&c| c as f64 / n).collect()
    }
}
