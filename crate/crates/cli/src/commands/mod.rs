//! Subcommand implementations. Each one parses its config, writes its
//! outputs into the run directory and returns a summary for the manifest.

pub mod grover;
pub mod hadamard;
pub mod rabi;
pub mod sample;
pub mod waveform;

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Output directory plus the list of files written so far.
pub struct Outputs {
    dir: PathBuf,
    pub format: TableFormat,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, format: TableFormat) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Claims `name` in the output directory and returns its full path.
    pub fn claim(&mut self, name: &str) -> PathBuf {
        self.written.push(PathBuf::from(name));
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.claim(name);
        std::fs::write(&path, content).map_err(|e| CliError::io(&path, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("output serialises");
        self.text(name, &(text + "\n"))
    }

    /// A table as `<stem>.csv` or `<stem>.json` depending on `--format`.
    pub fn table<T: Serialize>(&mut self, stem: &str, csv: impl FnOnce() -> String, value: &T) -> Result<()> {
        match self.format {
            TableFormat::Csv => self.text(&format!("{stem}.csv"), &csv()),
            TableFormat::Json => self.json(&format!("{stem}.json"), value),
        }
    }
}

/// What a command hands back to `main`.
pub struct Report {
    pub summary: Value,
    /// Set when an optimisation did not converge; outputs are still written.
    pub not_converged: Option<String>,
}

impl Report {
    pub fn ok(summary: Value) -> Self {
        Self {
            summary,
            not_converged: None,
        }
    }
}

pub(crate) fn check_level(level: usize, n_levels: usize, what: &str) -> Result<()> {
    if level >= n_levels {
        return Err(CliError::config(format!(
            "{what} = {level} is out of range for a {n_levels}-level qudit"
        )));
    }
    Ok(())
}

pub(crate) fn validate_qudit(q: &qudit_sim::QuditSpec) -> Result<()> {
    q.validate().map_err(|e| CliError::config(format!("qudit: {e}")))
}
