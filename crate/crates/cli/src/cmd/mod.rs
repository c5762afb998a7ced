//! Subcommand implementations and the plumbing they share.

pub mod painleve;
pub mod simulate;
pub mod sweep;
pub mod transform;
pub mod verify;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

/// What a subcommand hands back to `main`: a process exit code and the
/// human-readable summary to print. Keeping the lines out of `stdout` until
/// the command finishes lets `sweep` redirect them into per-case logs.
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn new(code: i32, lines: Vec<String>) -> Self {
        Outcome { code, lines }
    }
}

/// Reads a JSON config file whose keys mirror the command-line flags.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
}

/// Unwraps a value that may come from either a flag or the config file.
pub fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing {flag}: pass it on the command line or in --config"))
}

/// `prefix` + literal `suffix`, e.g. `runs/a` + `_0001.csv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}
