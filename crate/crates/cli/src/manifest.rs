//! Run manifests: a JSON snapshot of the resolved configuration plus
//! digests of every produced file, written alongside the primary
//! output. Feeding a manifest back through `--config` reproduces the
//! run (bit-identically for fixed-seed statistical outputs).

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Resolved configuration snapshot (flags already folded in).
    pub config: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((hex, bytes.len() as u64))
}

/// Path of the manifest that accompanies `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Digest the outputs and write the manifest next to the first one.
pub fn write_manifest<C: Serialize>(
    subcommand: &str,
    config: &C,
    rng_seed: Option<u64>,
    outputs: &[PathBuf],
) -> Result<PathBuf> {
    let mut digests = Vec::with_capacity(outputs.len());
    for path in outputs {
        let (sha256, bytes) = sha256_file(path)?;
        digests.push(OutputDigest { path: path.display().to_string(), sha256, bytes });
    }
    let manifest = RunManifest {
        tool: "timebin".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: subcommand.to_string(),
        rng_seed,
        config: serde_json::to_value(config)?,
        outputs: digests,
    };
    let primary = outputs
        .first()
        .ok_or_else(|| anyhow::anyhow!("no outputs to record in manifest"))?;
    let path = manifest_path(primary);
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
