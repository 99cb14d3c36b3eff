use thiserror::Error;

use crate::data::Variant;
use crate::trace::SelectionTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("statistic `{statistic}` expects {expected} data but got {found}")]
    VariantMismatch {
        statistic: String,
        expected: Variant,
        found: Variant,
    },

    #[error("statistic `{statistic}` produced a non-finite value ({value})")]
    NonFiniteStatistic { statistic: String, value: f64 },

    #[error("summary vectors differ in layout ({left} vs {right} components)")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid statistic subset: {0}")]
    InvalidSubset(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("no proposal accepted after {proposals} proposals (smallest distance {min_distance:.6e}); epsilon too tight")]
    EpsilonTooTight { min_distance: f64, proposals: u64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("contingency table has no counts")]
    AllZeroCounts,

    #[error("pool width {width} exceeds the exhaustive limit of {max}; use the greedy or stochastic algorithm")]
    PoolTooWide { width: usize, max: usize },

    #[error("{0} data cannot be bootstrap-resampled; use the KS criterion instead")]
    NotResampleable(Variant),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {kind} `{name}` (available: {})", available.join(", "))]
    UnknownName {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("selection failed: {source}")]
    Selection {
        #[source]
        source: Box<Error>,
        trace: Box<SelectionTrace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches the partial trace of an interrupted selection run.
    pub(crate) fn with_trace(self, trace: &SelectionTrace) -> Error {
        match self {
            e @ Error::Selection { .. } => e,
            e => Error::Selection {
                source: Box::new(e),
                trace: Box::new(trace.clone()),
            },
        }
    }
}
