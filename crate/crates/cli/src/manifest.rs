use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "run_manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Effective config after file loading and overrides.
    pub config: Value,
    pub seed: Option<u64>,
    pub artifact: String,
    pub version: String,
    /// Relative to the output directory.
    pub outputs: Vec<PathBuf>,
    pub wall_clock_s: f64,
    /// Command-specific summary.
    pub summary: Value,
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
