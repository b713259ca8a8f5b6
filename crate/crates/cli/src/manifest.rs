//! Run manifests: a deterministic record of what a run produced.
//!
//! The manifest carries the config echo, tool version, and content hashes of
//! every output file, then a hash over all of that.  Wall time is reported on
//! stderr, not in the manifest, so identical reruns produce bit-identical
//! manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
    pub content_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            schema_version: crate::config::SCHEMA_VERSION.to_string(),
            tool: "mfchaos".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            outputs: Vec::new(),
            content_hash: String::new(),
        }
    }

    /// Write `bytes` to `dir/name` and record its hash.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Seal the manifest (compute the content hash over the deterministic
    /// body) and write `manifest.json`.
    pub fn seal_and_write(mut self, dir: &Path) -> anyhow::Result<RunManifest> {
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let body = serde_json::json!({
            "schema_version": self.schema_version,
            "tool": self.tool,
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "outputs": self.outputs,
        });
        self.content_hash = sha256_hex(serde_json::to_string(&body)?.as_bytes());
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(self)
    }
}
