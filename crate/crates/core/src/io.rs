//! Run configuration, initial data, snapshots and CSV output.

pub mod config;
pub mod csv;
pub mod init;
pub mod snapshot;

use std::path::PathBuf;

use thiserror::Error;

use crate::interaction::InteractionError;

pub use config::{parse_config, ConfigError, InitKind, InitSpec, RunConfig, KEYS};
pub use init::make_initial;
pub use snapshot::{read_snapshot, snapshot_name, write_snapshot, SnapshotHeader};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{} configuration error(s):\n{}", .0.len(), .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigError>),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("truncated snapshot: expected {expected} data bytes, found {got}")]
    TruncatedSnapshot { expected: usize, got: usize },
    #[error("bad snapshot header: {0}")]
    BadHeader(String),
    #[error("snapshot extents {found:?} (dims {found_dims}, ell {found_ell}) do not match {expected:?} (dims {expected_dims}, ell {expected_ell})")]
    ExtentMismatch {
        expected: [usize; 3],
        expected_dims: usize,
        expected_ell: f64,
        found: [usize; 3],
        found_dims: usize,
        found_ell: f64,
    },
    #[error("initial condition: {0}")]
    Init(String),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
}

impl IoError {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::File {
            path: path.into(),
            source,
        }
    }
}
