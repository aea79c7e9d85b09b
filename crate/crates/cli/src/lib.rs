//! Reproducible experiment runner for `falconer-core`.
//!
//! An [`ExperimentConfig`] (TOML) names an experiment kind and the measures
//! it acts on. [`run_experiment`] writes one CSV per computed quantity and a
//! `manifest-<kind>.toml` with content hashes and the fitted exponents
//! compared against their predicted bounds. [`emit_report`] folds a
//! directory of manifests into a summary grouped by ambient dimension.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, Sweep};
pub use report::emit_report;
pub use run::{run_experiment, Finding, Manifest, Relation, RunOutcome};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] falconer_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {}: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },
}

impl CliError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use falconer_core::Error;
        match self {
            CliError::Invalid { .. } | CliError::Config(_) | CliError::Manifest { .. } => {
                EXIT_INVALID
            }
            CliError::Core(e) if e.is_budget() => EXIT_BUDGET,
            CliError::Core(Error::Invalid { .. } | Error::Parse { .. }) => EXIT_INVALID,
            CliError::Core(_) | CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}
