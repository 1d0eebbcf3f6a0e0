//! Experiment suites for the tactile mobile manipulator simulation: scenario
//! configs, the pose-adjustment sweep, the cooperative lift suite, regressor
//! training, CSV emission and report rendering.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod criteria;
pub mod csvio;
pub mod lift;
pub mod report;
pub mod seeds;
pub mod sweep;
pub mod training;

pub use config::ExperimentConfig;
pub use lift::{run_lift_suite, LiftSuiteReport};
pub use sweep::{run_pose_sweep, SweepReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{origin}:{line}:{column}: {message}")]
    ConfigParse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{origin}: row {row}: {message}")]
    Csv { origin: String, row: u64, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tacmm::Error),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::ConfigParse { .. } | HarnessError::InvalidConfig(_))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
