//! File formats, dataset loading and experiment commands on top of
//! `qrobust-core`.

pub mod config;
pub mod datasets;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod meta;
pub mod plot;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
