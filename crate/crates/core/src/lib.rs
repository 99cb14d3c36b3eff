//! Approximate Bayesian computation with information-based selection of
//! summary statistics.
//!
//! The crate provides rejection ABC ([`abc`]), divergence estimators and
//! tests ([`divergence`]), statistic-selection algorithms ([`selection`]) and
//! three built-in model families ([`models`]) addressable by name through
//! [`registry`].

pub mod abc;
pub mod data;
pub mod distance;
pub mod divergence;
pub mod error;
pub mod io;
pub mod models;
pub mod particles;
pub mod pool;
pub mod registry;
pub mod rng;
pub mod selection;
pub mod trace;

pub use abc::{
    abc_joint, abc_parameter, abc_tables, bayes_factor_from_particles, prior_predictive_scales, AbcConfig, Epsilon, Model,
    ModelSpec, ReferenceTable,
};
pub use data::{Dataset, DatasetKind, HaplotypeMatrix, Variant};
pub use distance::{log_square_distance, Distance};
pub use divergence::{CriterionConfig, CriterionMode, Marginal, SampleCloud, Verdict};
pub use error::{Error, Result};
pub use particles::{Particle, ParticleSet};
pub use pool::{evaluate_subset, Statistic, StatisticPool, StatisticSubset, SummaryVector};
pub use rng::NoiseStream;
pub use selection::{Algorithm, SelectionConfig};
pub use trace::{AbcUsage, Decision, SelectionTrace, Stage, TraceEvent};
