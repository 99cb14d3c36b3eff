//! Declarative experiment description, parsed from TOML.

use std::path::PathBuf;

use abcsuff_core::registry::{self, ModelOptions};
use abcsuff_core::selection::MAX_EXHAUSTIVE_WIDTH;
use abcsuff_core::{AbcConfig, Algorithm, CriterionConfig, Distance, Epsilon, SelectionConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SelectParams,
    SelectJoint,
    BfScatter,
    PosteriorCheck,
}

/// Where each replicate's observed data comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truth {
    /// Generating model; defaults to the first listed model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Fixed parameters; drawn from the prior per replicate when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<f64>>,
    /// External dataset dump used for every replicate instead of simulating.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSettings {
    pub algorithm: Algorithm,
    pub criterion: CriterionConfig,
    pub epsilon_stop: f64,
    pub order_dependency: bool,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        let c = SelectionConfig::new(AbcConfig::new(1.0, 1, 1, 0), 0);
        Self {
            algorithm: c.algorithm,
            criterion: c.criterion,
            epsilon_stop: c.epsilon_stop,
            order_dependency: c.order_dependency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbcSettings {
    pub epsilon: Epsilon,
    pub particles: usize,
    pub max_proposals: u64,
    pub distance: Distance,
    /// Divide each distance coordinate by its prior-predictive spread.
    pub standardize: bool,
    /// Simulations per model used to estimate that spread.
    pub pilot_draws: usize,
}

impl Default for AbcSettings {
    fn default() -> Self {
        Self {
            epsilon: Epsilon::Absolute(0.1),
            particles: 500,
            max_proposals: 2_000_000,
            distance: Distance::default(),
            standardize: false,
            pilot_draws: 2000,
        }
    }
}

impl AbcSettings {
    pub fn config(&self, seed: u64) -> AbcConfig {
        AbcConfig {
            epsilon: self.epsilon,
            particles: self.particles,
            max_proposals: self.max_proposals,
            seed,
            workers: 0,
            distance: self.distance,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Fresh simulations for every ABC run.
    #[default]
    Simulate,
    /// One prior-predictive reference table per model, shared by all replicates.
    Tables,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSettings {
    pub kind: BackendKind,
    /// Rows per model table.
    pub rows: usize,
}

impl Default for BackendSettings {
    fn default() -> Self {
        Self {
            kind: BackendKind::Simulate,
            rows: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfSettings {
    /// Statistic sets whose ABC Bayes factors are compared with the analytic one.
    pub statistic_sets: Vec<Vec<String>>,
    /// Also run joint selection per replicate and score its subset.
    pub include_selected: bool,
}

impl Default for BfSettings {
    fn default() -> Self {
        Self {
            statistic_sets: vec![vec!["mean".into(), "S2".into()], vec!["mean".into()]],
            include_selected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSettings {
    pub statistics: Vec<String>,
    /// Draws from the exact posterior compared against the particles.
    pub draws: usize,
    /// KS p-value above which a replicate passes.
    pub p_threshold: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            statistics: vec!["mean".into()],
            draws: 5000,
            p_threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub models: Vec<String>,
    pub pool: String,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_outdir")]
    pub outdir: PathBuf,
    #[serde(default)]
    pub truth: Truth,
    #[serde(default)]
    pub options: ModelOptions,
    #[serde(default)]
    pub selection: SelectionSettings,
    #[serde(default)]
    pub abc: AbcSettings,
    #[serde(default)]
    pub backend: BackendSettings,
    #[serde(default)]
    pub bf: BfSettings,
    #[serde(default)]
    pub check: CheckSettings,
}

fn one() -> usize {
    1
}

fn default_outdir() -> PathBuf {
    PathBuf::from("results")
}

/// Line (1-based) of the first assignment to `key` in `text`, if any.
fn locate(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Parses, fills defaults and cross-checks a config.
pub fn validate_spec(text: &str) -> Result<ExperimentSpec, CliError> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    spec.validate().map_err(|e| match e {
        CliError::Invalid { field, message, .. } => {
            let key = field.rsplit('.').next().unwrap_or(&field).to_string();
            CliError::Invalid {
                line: locate(text, &key),
                field,
                message,
            }
        }
        other => other,
    })?;
    Ok(spec)
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.to_string(),
        line: None,
        message: message.into(),
    }
}

impl ExperimentSpec {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serialises")
    }

    pub fn truth_model(&self) -> &str {
        self.truth
            .model
            .as_deref()
            .or(self.models.first().map(String::as_str))
            .unwrap_or("")
    }

    pub fn selection_config(&self, abc_seed: u64, shuffle_seed: u64) -> SelectionConfig {
        SelectionConfig {
            algorithm: self.selection.algorithm,
            criterion: self.selection.criterion,
            abc: self.abc.config(abc_seed),
            epsilon_stop: self.selection.epsilon_stop,
            order_dependency: self.selection.order_dependency,
            seed: shuffle_seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.pool.trim().is_empty() {
            return Err(invalid("pool", "pool name must not be empty"));
        }
        let pool = registry::pool(&self.pool).map_err(|e| invalid("pool", e.to_string()))?;
        if self.replicates == 0 {
            return Err(invalid("replicates", "replicate count R must be at least 1"));
        }
        if self.models.is_empty() {
            return Err(invalid("models", "at least one model is required"));
        }
        self.options.validate().map_err(|e| invalid("options", e.to_string()))?;
        let models = registry::models(&self.models, &self.options).map_err(|e| invalid("models", e.to_string()))?;
        for m in &models {
            if pool.statistics().iter().any(|s| s.variant() != m.model.variant()) {
                return Err(invalid(
                    "models",
                    format!("model `{}` does not produce the data pool `{}` expects", m.name(), self.pool),
                ));
            }
        }
        let truth = registry::model(self.truth_model(), 0, &self.options).map_err(|e| invalid("truth.model", e.to_string()))?;
        if truth.model.variant() != models[0].model.variant() {
            return Err(invalid("truth.model", "generating model produces a different data type"));
        }
        if let Some(p) = &self.truth.parameters {
            if p.len() != truth.dim() {
                return Err(invalid(
                    "truth.parameters",
                    format!("model `{}` takes {} parameters, got {}", truth.name(), truth.dim(), p.len()),
                ));
            }
            if truth.model.prior_density(p) <= 0.0 {
                return Err(invalid("truth.parameters", "parameters lie outside the prior support"));
            }
        }
        let s = &self.selection;
        let cfg = self.selection_config(0, 0);
        cfg.validate().map_err(|e| invalid("selection", e.to_string()))?;
        if s.algorithm == Algorithm::Exhaustive && pool.len() > MAX_EXHAUSTIVE_WIDTH {
            return Err(invalid(
                "algorithm",
                format!("pool width {} exceeds the exhaustive limit {MAX_EXHAUSTIVE_WIDTH}", pool.len()),
            ));
        }
        if self.abc.standardize && self.abc.pilot_draws < 2 {
            return Err(invalid("pilot_draws", "need at least 2 pilot simulations per model"));
        }
        if self.backend.kind == BackendKind::Tables && self.backend.rows < self.abc.particles {
            return Err(invalid("rows", "reference tables need at least as many rows as particles"));
        }
        let gaussian = |field: &str| -> Result<(), CliError> {
            if models.is_empty() || models.iter().any(|m| m.model.variant() != Variant::RealVector || !m.name().starts_with("gauss")) {
                return Err(invalid(field, "requires the Gaussian models, whose exact posteriors are known"));
            }
            Ok(())
        };
        let names_exist = |field: &str, names: &[String]| -> Result<(), CliError> {
            if names.is_empty() {
                return Err(invalid(field, "statistic set must not be empty"));
            }
            pool.subset_by_names(names).map(|_| ()).map_err(|e| invalid(field, e.to_string()))
        };
        match self.kind {
            ExperimentKind::SelectParams => {
                if models.len() != 1 {
                    return Err(invalid("models", "select_params takes exactly one model"));
                }
            }
            ExperimentKind::SelectJoint => {
                if models.len() < 2 {
                    return Err(invalid("models", "select_joint needs at least two models"));
                }
            }
            ExperimentKind::BfScatter => {
                gaussian("models")?;
                if models.len() != 2 {
                    return Err(invalid("models", "bf_scatter compares exactly two models"));
                }
                if self.bf.statistic_sets.is_empty() && !self.bf.include_selected {
                    return Err(invalid("statistic_sets", "nothing to score"));
                }
                for set in &self.bf.statistic_sets {
                    names_exist("statistic_sets", set)?;
                }
            }
            ExperimentKind::PosteriorCheck => {
                gaussian("models")?;
                if models.len() != 1 {
                    return Err(invalid("models", "posterior_check takes exactly one model"));
                }
                names_exist("statistics", &self.check.statistics)?;
                if self.check.draws < 5 {
                    return Err(invalid("draws", "need at least 5 posterior draws"));
                }
                if !(self.check.p_threshold > 0.0 && self.check.p_threshold < 1.0) {
                    return Err(invalid("p_threshold", "must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }
}
