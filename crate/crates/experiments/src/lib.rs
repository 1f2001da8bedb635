//! Experiment harness: configuration, noise sweeps, bound fits and the
//! verification suites behind the `hqs` command.

pub mod config;
pub mod criteria;
pub mod sweep;

pub use config::{ExperimentConfig, Model, ObservableSpec};
pub use criteria::{verify, Check, Suite};
pub use sweep::{fit_bound, parse_sweep_csv, run_sweep, size_independence, BoundFit, SizeTable, SweepResult, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum ExpError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("csv schema: {0}")]
    Schema(String),
    #[error("fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Core(#[from] hqs_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExpError {
    /// 2 for bad input, 3 for a dense ceiling overrun, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) | ExpError::Schema(_) => 2,
            ExpError::Core(hqs_core::Error::DenseCeiling { .. }) => 3,
            ExpError::Core(hqs_core::Error::OutOfRange { .. } | hqs_core::Error::UnsupportedLayout(_)) => 2,
            _ => 1,
        }
    }
}
