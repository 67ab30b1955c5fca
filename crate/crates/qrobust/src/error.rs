use std::path::PathBuf;

use thiserror::Error;

use qrobust_core::channels::ChannelError;
use qrobust_core::data::DataError;
use qrobust_core::dpbounds::BoundError;
use qrobust_core::qml::QmlError;
use qrobust_core::sdp::SdpError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Qml(#[from] QmlError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("solver did not converge in {cells} cell(s); partial outputs written")]
    NonConvergence { cells: usize },
    #[error("channel violates {0} constraint block(s)")]
    Validation(usize),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 config, 3 non-convergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::NonConvergence { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
