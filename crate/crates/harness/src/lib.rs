//! Experiment orchestration for the waveguide-fed metasurface designer:
//! configuration, element placement, the Monte Carlo error-bound sweep and
//! its serialization.

use std::path::PathBuf;

use thiserror::Error;

pub mod checks;
pub mod config;
pub mod output;
pub mod placement;
pub mod seeds;
pub mod sweep;

pub use config::{Config, PlacementKind};
pub use placement::{generate_placement, PlacementSpec};
pub use sweep::{run_sweep, Measure, SweepRow};

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("placement failed: {0}")]
    Placement(String),

    #[error(transparent)]
    Core(#[from] wgms_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl HarnessError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
