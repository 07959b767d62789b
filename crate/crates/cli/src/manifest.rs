use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command run: what went in, what came out, how long it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// sha256 over every input that affects the artifact bytes.
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<StageTiming>,
}

/// Collects inputs, outputs and timings while a command runs, and writes
/// (or in dry-run mode only lists) its artifacts.
pub struct Recorder {
    command: String,
    hasher: Sha256,
    seeds: BTreeMap<String, u64>,
    outputs: Vec<PathBuf>,
    timings: Vec<StageTiming>,
    dry_run: bool,
}

impl Recorder {
    pub fn new(command: &str, dry_run: bool) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(command.as_bytes());
        Self {
            command: command.into(),
            hasher,
            seeds: BTreeMap::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            dry_run,
        }
    }

    pub fn dry_run(&self) -> bool {
        self.dry_run
    }

    /// Feeds a labelled input into the config hash.
    pub fn input(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.into(), value);
        self.input(&format!("seed:{name}"), &value.to_le_bytes());
    }

    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: name.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes an artifact, registering its path exactly once.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if self.outputs.iter().any(|p| p == path) {
            bail!("artifact {} emitted twice", path.display());
        }
        self.outputs.push(path.to_path_buf());
        if self.dry_run {
            return Ok(());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes the manifest itself to `path` and returns it.
    pub fn finish(mut self, path: &Path) -> Result<RunManifest> {
        self.outputs.push(path.to_path_buf());
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.clone(),
            config_hash: hex::encode(self.hasher.clone().finalize()),
            seeds: self.seeds.clone(),
            outputs: self.outputs.clone(),
            timings: self.timings.clone(),
        };
        self.outputs.pop();
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.write(path, text.as_bytes())?;
        Ok(manifest)
    }
}
