//! Reproducibility plumbing: the run manifest, its content hash, atomic
//! file writes, and number formatting for bit-stable CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything that determines a run's outputs. Hashed, and the hash is
/// embedded in every artifact so results trace back to their inputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

/// 9 significant digits, '.' decimal separator, locale-independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// Write bytes to `dir/name` atomically: temp file in the same directory,
/// flush, then rename over the target.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let io_err = |e: std::io::Error| CliError::Usage(format!("write {}: {e}", target.display()));
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(bytes).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, &target).map_err(io_err)?;
    Ok(target)
}

/// CSV document with the manifest hash on a leading comment line.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(manifest_hash: &str, header: &str) -> Self {
        Self {
            buf: format!("# manifest {manifest_hash}\n{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Serialize a payload to pretty JSON with the manifest hash injected as a
/// top-level `"manifest_hash"` field.
pub fn json_with_hash<T: Serialize>(payload: &T, hash: &str) -> Result<Vec<u8>, CliError> {
    let mut value = serde_json::to_value(payload)
        .map_err(|e| CliError::Usage(format!("serialize output: {e}")))?;
    match &mut value {
        serde_json::Value::Object(map) => {
            map.insert(
                "manifest_hash".into(),
                serde_json::Value::String(hash.to_string()),
            );
        }
        other => {
            let mut map = serde_json::Map::new();
            map.insert("manifest_hash".into(), serde_json::Value::String(hash.into()));
            map.insert("value".into(), other.take());
            value = serde_json::Value::Object(map);
        }
    }
    let mut bytes = serde_json::to_vec_pretty(&value)
        .map_err(|e| CliError::Usage(format!("serialize output: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}
