//! Run manifests: enough provenance to reproduce any artifact-producing run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use neon::Result;

#[derive(Debug, Serialize)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one command invocation.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_paths: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileStamp>,
    pub outputs: Vec<FileStamp>,
    pub timestamp_epoch_secs: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_paths: Vec::new(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timestamp_epoch_secs: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn config(&mut self, path: &Path) -> &mut Self {
        self.config_paths.push(path.display().to_string());
        self
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs.push(stamp(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        self.outputs.push(stamp(path)?);
        Ok(self)
    }

    /// Writes `manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        self.write_file(&out_dir.join("manifest.json"))
    }

    /// Writes the manifest to an explicit path.
    pub fn write_file(&self, path: &Path) -> Result<PathBuf> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(path.to_path_buf())
    }
}

fn stamp(path: &Path) -> Result<FileStamp> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(FileStamp {
        path: path.display().to_string(),
        sha256: format!("{digest:x}"),
    })
}
