//! Run manifests: enough metadata to reproduce any command byte-for-byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub dataset_paths: Vec<String>,
    pub output_paths: Vec<String>,
    pub artifact_version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().collect(),
            seed,
            dataset_paths: Vec::new(),
            output_paths: Vec::new(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn dataset(mut self, path: &Path) -> Self {
        self.dataset_paths.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.output_paths.push(path.display().to_string());
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}
