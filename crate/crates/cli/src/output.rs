//! Output directory with atomic file writes and the provenance files every
//! run leaves behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;
use trophwave_core::ModelParams;

use crate::config::{resolved_config, ResolvedParams, RunConfig};
use crate::error::CliError;

pub struct OutputDir {
    path: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(path)?;
        Ok(Self { path: path.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes `name` through a temporary file in the same directory and
    /// renames it into place.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let mut tmp = NamedTempFile::new_in(&self.path)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path.join(name)).map_err(|e| CliError::Io(e.error))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `config.toml` (the resolved configuration) and
    /// `metadata.json`.
    pub fn write_provenance(
        &mut self,
        command: &str,
        cfg: &RunConfig,
        resolved: &ResolvedParams,
    ) -> Result<(), CliError> {
        let full = resolved_config(cfg, &resolved.params);
        let text = toml::to_string(&full)
            .map_err(|e| CliError::Numerical(format!("serializing config: {e}")))?;
        self.write("config.toml", &text)?;
        let mut files = self.written.clone();
        files.push("metadata.json".into());
        let meta = Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params: resolved.params,
            d: resolved.params.d,
            d_defaulted: resolved.d_defaulted,
            notes: resolved.notes(),
            seed: cfg.seed,
            files,
        };
        self.write_json("metadata.json", &meta)
    }
}

#[derive(Debug, Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    command: String,
    params: ModelParams,
    d: f64,
    d_defaulted: bool,
    notes: Vec<String>,
    seed: u64,
    files: Vec<String>,
}
