//! Monte-Carlo experiment engine.
//!
//! Every trial draws one scatterer pool and one `(H_b, H_e)` pair from an
//! RNG stream keyed by `(seed, trial_id)`; all algorithms and grid points of
//! that trial reuse the same channels. Trials run on the ambient rayon pool
//! and results are sorted before emission, so output bytes do not depend on
//! the thread count.

mod config;
mod output;
mod sweep;

pub use config::{Algorithm, ConfigError, ExperimentConfig, ExperimentKind, FieldIssue};
pub use output::{emit_results, read_csv, sort_results, write_csv, write_json, OutputFormat, SecrecyResult, XKind};
pub use sweep::{draw_trial, evaluate_snr_trial, run_qos_sweep, run_snr_sweep, snr_db_to_power, Trial};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Format(String),

    #[error("trial {trial_id}: {source}")]
    Simulation {
        trial_id: u64,
        #[source]
        source: crate::Error,
    },
}

impl HarnessError {
    /// Process exit code: 1 for invalid configuration, 2 for I/O, 3 for a
    /// numerical failure inside a trial.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Io(_) | HarnessError::Format(_) => 2,
            HarnessError::Simulation { .. } => 3,
        }
    }
}
