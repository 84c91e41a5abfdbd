//! `manifest.json`: what each stage wrote, the digests of what it read, and
//! the digest of the configuration it ran under.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use pseudoclust::digest::sha256_hex;

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    /// Unix seconds of the last update; the only time-dependent value of a run.
    pub updated_at: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_digest: String,
    /// Relative path to SHA-256 of every artifact the stage consumed.
    pub inputs: BTreeMap<String, String>,
    /// Relative path to SHA-256 of every artifact the stage wrote.
    pub artifacts: BTreeMap<String, String>,
    /// Files from outside the output directory, by the path given.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sources: BTreeMap<String, String>,
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Artifact I/O rooted at the output directory, recording digests as it goes.
pub struct Workspace {
    pub root: PathBuf,
    pub manifest: Manifest,
}

impl Workspace {
    pub fn open(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let path = root.join(MANIFEST_FILE);
        let manifest = if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Stale(format!("unreadable {}: {e}", path.display())))?
        } else {
            Manifest::default()
        };
        Ok(Workspace { root: root.to_path_buf(), manifest })
    }

    pub fn path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    /// The stage's record, after checking every file it wrote is unchanged
    /// and, when given, that it ran under `config_digest`.
    pub fn require(&self, stage: &str, config_digest: Option<&str>) -> Result<&StageRecord> {
        let command = stage.split(':').next().unwrap_or(stage);
        let record = self.manifest.stages.get(stage).ok_or_else(|| {
            CliError::Stale(format!("`{command}` has not been run in {}", self.root.display()))
        })?;
        if let Some(expected) = config_digest {
            if record.config_digest != expected {
                return Err(CliError::Stale(format!(
                    "`{command}` ran under a different configuration; re-run it with the current one"
                )));
            }
        }
        for (relative, digest) in &record.artifacts {
            let path = self.path(relative);
            if !path.exists() {
                return Err(CliError::Stale(format!("{} written by `{command}` is missing", path.display())));
            }
            if &file_digest(&path)? != digest {
                return Err(CliError::Stale(format!(
                    "{} changed since `{command}` wrote it; re-run `{command}`",
                    path.display()
                )));
            }
        }
        for (relative, digest) in &record.inputs {
            let path = self.path(relative);
            if !path.exists() || &file_digest(&path)? != digest {
                return Err(CliError::Stale(format!(
                    "{} changed since `{command}` read it; re-run `{command}`",
                    path.display()
                )));
            }
        }
        Ok(record)
    }

    pub fn write(&self, relative: &str, bytes: &[u8]) -> Result<(String, String)> {
        let path = self.path(relative);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok((relative.to_string(), sha256_hex(bytes)))
    }

    pub fn digest_of(&self, relative: &str) -> Result<(String, String)> {
        Ok((relative.to_string(), file_digest(&self.path(relative))?))
    }

    pub fn record(&mut self, stage: &str, record: StageRecord) -> Result<()> {
        self.manifest.stages.insert(stage.to_string(), record);
        self.manifest.updated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let path = self.path(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
