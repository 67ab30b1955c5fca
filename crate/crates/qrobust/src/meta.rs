use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::formats::write_json;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub split: u64,
    pub init: u64,
    pub train: u64,
}

/// Provenance written next to every output as `<file>.meta.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    pub config_hash: String,
    pub seeds: Seeds,
    pub version: String,
}

impl Meta {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            command: command.to_string(),
            config_hash: cfg.hash(),
            seeds: Seeds { master: cfg.seed, split: cfg.split_seed(), init: cfg.init_seed(), train: cfg.train_seed() },
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn meta_path(file: &Path) -> PathBuf {
    let mut name = file.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    file.with_file_name(name)
}

pub fn write_meta(file: &Path, meta: &Meta) -> Result<PathBuf> {
    let path = meta_path(file);
    write_json(&path, meta)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_name() {
        assert_eq!(meta_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.meta.json"));
    }
}
