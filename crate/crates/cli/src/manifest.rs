//! Run manifest: enough provenance to reproduce a run bit-for-bit.
//!
//! A manifest records the hash of the effective configuration (after any
//! command-line overrides), the master seed, and the version of every
//! workspace module involved. It deliberately excludes timestamps and
//! host details, so rerunning the same configuration yields an
//! identical manifest file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::util::write_file;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// SHA-256 of the canonical JSON rendering of the effective config.
    pub config_sha256: String,
    pub seed: u64,
    /// Module name → version, sorted for stable serialization.
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn for_config(config: &ExperimentConfig) -> CliResult<Self> {
        let canonical = config.canonical_json()?;
        let digest = Sha256::digest(canonical.as_bytes());
        let mut versions = BTreeMap::new();
        versions.insert("qprep-core".to_string(), qprep_core::VERSION.to_string());
        versions.insert("qprep-methods".to_string(), qprep_methods::VERSION.to_string());
        versions.insert("qprep-qml".to_string(), qprep_qml::VERSION.to_string());
        versions.insert("qprep-cli".to_string(), env!("CARGO_PKG_VERSION").to_string());
        Ok(Self {
            config_sha256: format!("{digest:x}"),
            seed: config.seed,
            versions,
        })
    }

    /// Writes `manifest.json` (plus a copy of the effective config for
    /// human readers) into the run directory.
    pub fn write(&self, out_dir: &Path, config: &ExperimentConfig) -> CliResult<()> {
        write_file(
            &out_dir.join(MANIFEST_FILE),
            &format!("{}\n", serde_json::to_string_pretty(self)?),
        )?;
        write_file(
            &out_dir.join("config.json"),
            &format!("{}\n", serde_json::to_string_pretty(config)?),
        )
    }

    pub fn load(out_dir: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(out_dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}
