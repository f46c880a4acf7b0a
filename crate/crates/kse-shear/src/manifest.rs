//! Run manifests: every output file is listed in exactly one manifest,
//! together with the configuration echo and the seed, so a run can be
//! reproduced byte-for-byte from its manifest.

use crate::error::Result;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub build: String,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub config_echo: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub steps: Option<usize>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_echo: serde_json::Value, seed: Option<u64>, jobs: usize) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            build: option_env!("KSE_SHEAR_GIT_DESCRIBE")
                .unwrap_or("unknown")
                .to_string(),
            seed,
            jobs,
            config_echo,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
            steps: None,
            notes: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &PathBuf) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::KseError::InvalidInput(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
