//! Run manifest: the last file written to a run directory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmittedFile {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub time_steps: usize,
    pub time_step: f64,
    pub space_points: usize,
    pub space_min: f64,
    pub space_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub override_consistency: bool,
    pub config: RunConfig,
    pub grids: GridSummary,
    pub wall_time_seconds: f64,
    pub files: Vec<EmittedFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn describe_file(dir: &Path, name: &str) -> std::io::Result<EmittedFile> {
    let bytes = fs::read(dir.join(name))?;
    Ok(EmittedFile { name: name.to_owned(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) })
}

/// Reads the manifest of a previous run, if that run completed.
pub fn read_manifest(dir: &Path) -> Option<RunManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_NAME)).ok()?;
    serde_json::from_str(&text).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
