//! The JSON record written next to every run's artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// File name relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub method: String,
    pub hold_us: f64,
    pub phi0: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_leakage: Option<f64>,
    pub failures: Vec<String>,
    /// Command-specific scalar results.
    pub values: serde_json::Map<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    pub jobs: usize,
    pub config: Config,
    pub calibration: Option<CalibrationSummary>,
    pub diagnostics: Diagnostics,
    pub wall_seconds: f64,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunRecord {
    /// Checks that every listed artifact exists in `dir` and matches its hash.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        for a in &self.artifacts {
            let bytes = std::fs::read(dir.join(&a.path))
                .map_err(|e| CliError::Io(format!("{}: {e}", a.path)))?;
            if sha256_hex(&bytes) != a.sha256 {
                return Err(CliError::Io(format!("{}: hash mismatch", a.path)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
