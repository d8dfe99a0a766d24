//! Atomic file output and run manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Write `path` through a temporary file in the same directory, renamed
/// into place only after `fill` succeeds.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::input(path.display(), e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(|e| CliError::input(path.display(), e))?;
        w.flush().map_err(|e| CliError::input(path.display(), e))?;
    }
    tmp.persist(path).map_err(|e| CliError::input(path.display(), e.error))?;
    Ok(())
}

/// `path` with `suffix` appended to the file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn digest(path: &Path) -> Result<InputDigest, CliError> {
    let mut file = File::open(path).map_err(|e| CliError::input(path.display(), e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let k = file.read(&mut buf).map_err(|e| CliError::input(path.display(), e))?;
        if k == 0 {
            break;
        }
        hasher.update(&buf[..k]);
        bytes += k as u64;
    }
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

/// Everything needed to rerun a command and find its outputs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    /// Resolved settings, defaults included.
    pub config: BTreeMap<String, Value>,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub started_unix_secs: u64,
    pub duration_secs: f64,
}

/// Collects a manifest while a command runs.
pub struct Run {
    command: String,
    seed: u64,
    config: BTreeMap<String, Value>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    started: Instant,
    started_unix: u64,
}

impl Run {
    pub fn start(command: &str, seed: u64) -> Self {
        Run {
            command: command.to_string(),
            seed,
            config: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.to_string(), value.into());
    }

    /// Record an `f32` by its shortest decimal form rather than its widened
    /// binary value.
    pub fn set_f32(&mut self, key: &str, value: f32) {
        let v: f64 = value.to_string().parse().expect("f32 display parses");
        self.set(key, v);
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Write the manifest next to `primary` as `<primary>.manifest.json`.
    pub fn finish(self, primary: &Path) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            argv: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            started_unix_secs: self.started_unix,
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        let path = manifest_path(primary);
        write_atomic(&path, |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(io::Error::other)?;
            writeln!(w)
        })?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    sibling(primary, ".manifest.json")
}

/// Manifest stored next to `primary`, if any.
pub fn read_manifest(primary: &Path) -> Option<RunManifest> {
    let text = std::fs::read_to_string(manifest_path(primary)).ok()?;
    serde_json::from_str(&text).ok()
}
