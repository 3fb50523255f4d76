use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Replay information embedded in every output. Contains no timestamps, so
/// identical runs produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
    pub inputs: Vec<InputDigest>,
}

/// Reads input files while recording their content hashes.
#[derive(Debug, Default)]
pub struct Inputs {
    digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => anyhow::Error::new(Failure::new(
                "input-not-found",
                format!("{}: no such file", path.display()),
            )),
            _ => anyhow::Error::new(e).context(format!("reading {}", path.display())),
        })?;
        self.digests.push(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn finish(self, command: &'static str, seed: u64, config: Value) -> Provenance {
        Provenance {
            tool: env!("CARGO_BIN_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            inputs: self.digests,
        }
    }
}

/// Everything a command produces: the JSON payload merged under the
/// provenance block, and a plain-text rendering.
pub struct Rendered {
    pub provenance: Provenance,
    pub payload: Map<String, Value>,
    pub table: String,
}

impl Rendered {
    pub fn records(&self) -> Result<String> {
        let mut doc = Map::new();
        doc.insert("provenance".into(), serde_json::to_value(&self.provenance)?);
        doc.extend(self.payload.clone());
        Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
    }

    pub fn table(&self) -> Result<String> {
        let header = serde_json::to_string(&self.provenance)?;
        Ok(format!("# provenance: {header}\n{}", self.table))
    }
}

/// Serializes `value`, which must be a JSON object, into a payload map.
pub fn payload(value: impl Serialize) -> Result<Map<String, Value>> {
    match serde_json::to_value(value)? {
        Value::Object(map) => Ok(map),
        other => anyhow::bail!("payload must be an object, got {other}"),
    }
}

/// Identifier derived from a file name: everything before the first dot.
pub fn video_id_from_path(path: &Path) -> Result<String> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .with_context(|| format!("cannot derive a video id from {}", path.display()))?;
    let id = name.split('.').next().unwrap_or(name);
    if id.is_empty() {
        return Err(
            Failure::config(format!("cannot derive a video id from {}", path.display())).into(),
        );
    }
    Ok(id.to_string())
}

pub fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// JSON form of a cost that may be infinite: `null` stands for +inf.
pub fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
