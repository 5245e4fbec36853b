//! Run manifest written next to every pipeline's outputs.

use crate::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    /// "complete" or "incomplete".
    pub status: String,
    pub error: Option<String>,
    pub timings: Vec<StageTiming>,
    pub files: Vec<FileEntry>,
    /// Values chosen during the run (truncation, grouping, selected sites).
    pub resolved: toml::Table,
    /// The configuration with every default filled in.
    pub config: toml::Table,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects output files and stage timings while a pipeline runs.
pub struct RunRecorder {
    out_dir: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl RunRecorder {
    pub fn new(out_dir: &Path, command: &str, seed: u64, threads: usize, config: toml::Table) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                seed,
                threads,
                status: "incomplete".into(),
                error: None,
                timings: Vec::new(),
                files: Vec::new(),
                resolved: toml::Table::new(),
                config,
            },
            clock: Instant::now(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Ends the current stage.
    pub fn stage(&mut self, name: &str) {
        let seconds = self.clock.elapsed().as_secs_f64();
        self.manifest.timings.push(StageTiming { stage: name.to_string(), seconds });
        self.clock = Instant::now();
    }

    pub fn resolve(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.manifest.resolved.insert(key.to_string(), value.into());
    }

    /// Registers a file already written under the output directory.
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = std::fs::read(self.path(name))?;
        self.manifest.files.push(FileEntry { path: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        std::fs::write(self.path(name), text)?;
        self.record(name)
    }

    /// Writes the manifest, marking the run complete unless `error` is set.
    pub fn finish(mut self, error: Option<&CliError>) -> Result<RunManifest, CliError> {
        match error {
            None => self.manifest.status = "complete".into(),
            Some(e) => self.manifest.error = Some(e.to_string()),
        }
        let text = toml::to_string(&self.manifest).map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(self.out_dir.join(MANIFEST_FILE), text)?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn failed_runs_are_marked_incomplete() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = RunRecorder::new(dir.path(), "evolve", 1, 1, toml::Table::new()).unwrap();
        rec.write_text("a.csv", "x\n").unwrap();
        let m = rec.finish(Some(&CliError::Config("bad".into()))).unwrap();
        assert_eq!(m.status, "incomplete");
        let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert!(text.contains("status = \"incomplete\""));
        assert!(text.contains("a.csv"));
    }
}
