//! Divergence estimators, two-sample tests and the selection criterion.

pub mod bootstrap;
pub mod chi2;
pub mod criterion;
pub mod knn;
pub mod ks;

pub use bootstrap::{bootstrap_datasets, bootstrap_delta, delta_from_clouds};
pub use chi2::pearson_chi2;
pub use criterion::{criterion, CriterionConfig, CriterionMode, Marginal, Verdict};
pub use knn::{entropy_knn, kl_knn, SampleCloud};
pub use ks::{kolmogorov_sf, ks_two_sample};
