//! Batch experiment runner: TOML experiment specs in, JSON and CSV results out.

pub mod error;
pub mod run;
pub mod spec;

pub use error::CliError;
pub use run::{read_report, run_experiment, write_outputs, RunReport};
pub use spec::{validate_spec, ExperimentKind, ExperimentSpec};
