//! Small shared helpers: named seed derivation and CSV-safe writing.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::CliResult;

/// Collapses a named substream of the master seed to a single `u64`,
/// so downstream components that take a plain seed still get
/// statistically independent streams per stage.
pub fn derived_seed(seed: u64, tag: &str, index: u64) -> u64 {
    qprep_core::rng::substream(seed, tag, index).gen()
}

/// Writes a file, creating parent directories as needed.
pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}
