//! Atomic file output and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use budgetopt_core::json;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects written outputs and emits the manifest describing the run.
pub struct Manifest {
    command: String,
    config: Value,
    base_seed: Option<u64>,
    outputs: Map<String, Value>,
}

impl Manifest {
    pub fn new(command: &str, config: Value, base_seed: Option<u64>) -> Self {
        Self { command: command.to_string(), config, base_seed, outputs: Map::new() }
    }

    /// Writes `bytes` atomically and records its digest.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.insert(path.display().to_string(), json!({ "sha256": sha256_hex(bytes), "bytes": bytes.len() }));
        Ok(())
    }

    /// Manifest path next to `primary`: `<primary>.manifest.json`.
    pub fn path_for(primary: &Path) -> PathBuf {
        let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        primary.with_file_name(name)
    }

    pub fn finish(self, path: &Path) -> std::io::Result<()> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command));
        m.insert("config".into(), self.config);
        m.insert("base_seed".into(), self.base_seed.map_or(Value::Null, Value::from));
        m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        m.insert("timestamp_unix".into(), Value::from(timestamp));
        m.insert("outputs".into(), Value::Object(self.outputs));
        write_atomic(path, json::to_string(&Value::Object(m)).as_bytes())
    }
}
