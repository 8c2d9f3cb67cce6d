//! Run manifests, artifact hashing and the results cache.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named text output produced by a command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory, `/`-separated.
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            contents: contents.into(),
        }
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.contents.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub config: serde_json::Value,
    pub cache_hit: bool,
    pub artifacts: Vec<ArtifactEntry>,
    pub timings: Vec<Timing>,
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes artifacts under `out_dir` and records them in a manifest next to
/// them.
pub fn write_run(
    out_dir: &Path,
    command: &str,
    config_hash: &str,
    config: serde_json::Value,
    artifacts: &[Artifact],
    cache_hit: bool,
    elapsed: Duration,
) -> Result<PathBuf> {
    let mut entries = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = out_dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, &a.contents).map_err(|e| Error::io(&path, e))?;
        entries.push(ArtifactEntry {
            path: a.name.clone(),
            sha256: a.sha256(),
            bytes: a.contents.len(),
        });
    }
    let manifest = RunManifest {
        command: command.to_string(),
        config_hash: config_hash.to_string(),
        version: TOOLKIT_VERSION.to_string(),
        config,
        cache_hit,
        artifacts: entries,
        timings: vec![Timing {
            stage: "total".into(),
            seconds: elapsed.as_secs_f64(),
        }],
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(RunManifest::file_name(command));
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Drift {
    Missing(String),
    Changed { path: String, expected: String, found: String },
}

/// Re-hashes every artifact listed in the manifest at `path`. Artifact
/// paths resolve against the manifest's directory.
pub fn verify_manifest(path: impl AsRef<Path>) -> Result<Vec<Drift>> {
    let path = path.as_ref();
    let manifest = RunManifest::read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut drift = Vec::new();
    for entry in &manifest.artifacts {
        let file = base.join(&entry.path);
        match std::fs::read(&file) {
            Ok(bytes) => {
                let found = sha256_hex(&bytes);
                if found != entry.sha256 {
                    drift.push(Drift::Changed {
                        path: entry.path.clone(),
                        expected: entry.sha256.clone(),
                        found,
                    });
                }
            }
            Err(_) => drift.push(Drift::Missing(entry.path.clone())),
        }
    }
    Ok(drift)
}

/// Content-addressed store of command outputs.
#[derive(Debug, Clone)]
pub struct ResultCache {
    dir: PathBuf,
}

impl ResultCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Key over the command, the result-relevant config and the input bytes.
    pub fn key(command: &str, config_hash: &str, inputs: &[String]) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(config_hash.as_bytes());
        for i in inputs {
            h.update([0]);
            h.update(i.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<Vec<Artifact>> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, artifacts: &[Artifact]) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path(key);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string(artifacts)?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}
