//! Machine-readable record of one run.

use std::path::{Path, PathBuf};

use pvt_energy::config::ConfigFile;
use pvt_energy::harness::RunSettings;
use pvt_energy::Error;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub replications: usize,
    pub scheme: String,
    pub wall_time_s: f64,
    pub unconverged_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub average_sup_distance: Option<f64>,
    pub outputs: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub config: ConfigFile,
}

impl RunManifest {
    pub fn new(config: &ConfigFile, settings: &RunSettings) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: settings.seed,
            replications: settings.replications,
            scheme: settings.schemes.to_string(),
            wall_time_s: 0.0,
            unconverged_points: 0,
            average_sup_distance: None,
            outputs: Vec::new(),
            failures: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        let text = toml::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
