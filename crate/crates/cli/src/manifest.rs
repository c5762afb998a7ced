//! Run manifests: what a command was asked to do, what it concluded, and
//! exactly which files it left behind.
//!
//! Report files themselves are byte-identical across repeated runs; anything
//! clock-dependent (start time, wall-clock duration) lives only here.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use tdnls_core::F17;

/// Serializes as pretty JSON with a trailing newline. Used for every JSON
/// file the tool writes so the byte layout is uniform.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("cannot serialize {}", path.display()))?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// `report.json` -> `report_manifest.json`; `runs/case` -> `runs/case_manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    out.with_file_name(format!("{stem}_manifest.json"))
}

#[derive(Serialize)]
struct OutputEntry {
    path: String,
    bytes: u64,
}

#[derive(Serialize)]
struct ManifestFile<'a, P: Serialize> {
    subcommand: &'a str,
    parameters: &'a P,
    tool_version: &'a str,
    started_unix: u64,
    wall_clock_seconds: F17,
    verdicts: &'a serde_json::Map<String, Value>,
    outputs: Vec<OutputEntry>,
}

/// Collects verdicts and output paths while a command runs; `write` stamps
/// the elapsed wall clock and stats every recorded output, so a manifest
/// always describes files that exist with their exact sizes.
///
/// `P` is the command's resolved parameter set. It is held as a typed value
/// rather than generic JSON so full-precision floats serialize through
/// [`F17`] untouched.
pub struct RunManifest<P: Serialize> {
    subcommand: &'static str,
    parameters: P,
    started_unix: u64,
    clock: Instant,
    verdicts: serde_json::Map<String, Value>,
    outputs: Vec<PathBuf>,
}

impl<P: Serialize> RunManifest<P> {
    pub fn new(subcommand: &'static str, parameters: P) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            subcommand,
            parameters,
            started_unix,
            clock: Instant::now(),
            verdicts: serde_json::Map::new(),
            outputs: Vec::new(),
        }
    }

    pub fn verdict(&mut self, name: &str, verdict: impl Into<String>) {
        self.verdicts.insert(name.to_string(), Value::String(verdict.into()));
    }

    /// Registers a file the command has already written.
    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(self, path: &Path) -> Result<()> {
        let mut outputs = Vec::with_capacity(self.outputs.len());
        for p in &self.outputs {
            let meta = std::fs::metadata(p)
                .with_context(|| format!("recorded output {} is missing", p.display()))?;
            outputs.push(OutputEntry { path: p.display().to_string(), bytes: meta.len() });
        }
        let file = ManifestFile::<P> {
            subcommand: self.subcommand,
            parameters: &self.parameters,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started_unix,
            wall_clock_seconds: F17(self.clock.elapsed().as_secs_f64()),
            verdicts: &self.verdicts,
            outputs,
        };
        write_json(path, &file)
    }
}
