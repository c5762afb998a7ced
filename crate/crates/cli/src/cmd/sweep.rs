//! `tdnls sweep`: run several subcommands concurrently, each in its own
//! directory under a common output root.
//!
//! The sweep config is the sole input:
//!
//! ```json
//! {
//!   "out_dir": "runs",
//!   "cases": [
//!     { "name": "good", "command": "painleve", "args": { "F": "1/t" } },
//!     { "name": "bad",  "command": "painleve", "args": { "F": "t^2" } }
//!   ]
//! }
//! ```
//!
//! `args` uses the same keys as the matching subcommand's flags. Relative
//! output paths inside `args` land in `<out_dir>/<name>/`; a case without an
//! explicit `out` gets a default one there. Each case writes its printed
//! summary to `log.txt` in its directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::cmd::{load_config, require, Outcome};
use crate::manifest::{write_json, RunManifest};

#[derive(Args, Clone)]
pub struct SweepArgs {
    /// Sweep description (JSON with out_dir and cases)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    out_dir: PathBuf,
    cases: Vec<SweepCase>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepCase {
    name: String,
    command: String,
    #[serde(default)]
    args: Value,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Sends a relative output path into the case directory.
fn rebase(path: &mut Option<PathBuf>, dir: &Path) {
    if let Some(p) = path {
        if p.is_relative() {
            *path = Some(dir.join(&*p));
        }
    }
}

fn case_args<T: serde::de::DeserializeOwned>(case: &SweepCase) -> Result<T> {
    let raw = if case.args.is_null() { json!({}) } else { case.args.clone() };
    serde_json::from_value(raw)
        .with_context(|| format!("case {:?}: invalid args for {}", case.name, case.command))
}

fn dispatch(case: &SweepCase, dir: &Path) -> Result<Outcome> {
    match case.command.as_str() {
        "painleve" => {
            let mut args: super::painleve::PainleveArgs = case_args(case)?;
            if args.out.is_none() {
                args.out = Some(PathBuf::from("report.json"));
            }
            rebase(&mut args.out, dir);
            super::painleve::run(args)
        }
        "simulate" => {
            let mut args: super::simulate::SimulateArgs = case_args(case)?;
            if args.out.is_none() {
                args.out = Some(PathBuf::from("sim"));
            }
            rebase(&mut args.out, dir);
            super::simulate::run(args)
        }
        "verify" => {
            let mut args: super::verify::VerifyArgs = case_args(case)?;
            if args.out.is_none() {
                args.out = Some(PathBuf::from("report.json"));
            }
            rebase(&mut args.out, dir);
            rebase(&mut args.dump, dir);
            super::verify::run(args)
        }
        "transform" => {
            let mut args: super::transform::TransformArgs = case_args(case)?;
            if args.out.is_none() {
                args.out = Some(PathBuf::from("field_out.csv"));
            }
            rebase(&mut args.out, dir);
            super::transform::run(args)
        }
        "sweep" => bail!("case {:?}: sweeps cannot nest", case.name),
        other => bail!("case {:?}: unknown command {other:?}", case.name),
    }
}

/// Runs one case and captures its outcome; errors become exit code 2 just as
/// they would for the standalone subcommand.
fn run_case(case: &SweepCase, dir: &Path) -> (i32, Vec<String>) {
    match dispatch(case, dir) {
        Ok(outcome) => (outcome.code, outcome.lines),
        Err(err) => (2, vec![format!("error: {err:#}")]),
    }
}

pub fn run(args: SweepArgs) -> Result<Outcome> {
    let config_path = require(args.config, "--config")?;
    let config: SweepConfig = load_config(&config_path)?;
    if config.cases.is_empty() {
        bail!("sweep config lists no cases");
    }
    for case in &config.cases {
        if !valid_name(&case.name) {
            bail!("case name {:?} is not a plain directory name", case.name);
        }
    }
    let mut names: Vec<&str> = config.cases.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(dup) = names.windows(2).find(|w| w[0] == w[1]) {
        bail!("case name {:?} appears twice", dup[0]);
    }

    let dirs: Vec<PathBuf> = config.cases.iter().map(|c| config.out_dir.join(&c.name)).collect();
    for dir in &dirs {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create case directory {}", dir.display()))?;
    }

    let mut manifest = RunManifest::new(
        "sweep",
        json!({
            "config": config_path.display().to_string(),
            "out_dir": config.out_dir.display().to_string(),
        }),
    );

    // One thread per case; results keep config order regardless of timing.
    let results: Vec<(i32, Vec<String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .cases
            .iter()
            .zip(&dirs)
            .map(|(case, dir)| scope.spawn(move || run_case(case, dir)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or((2, vec!["error: case thread panicked".to_string()])))
            .collect()
    });

    let mut lines = Vec::new();
    let mut summary_cases = Vec::new();
    let mut worst = 0i32;
    for ((case, dir), (code, case_lines)) in
        config.cases.iter().zip(&dirs).zip(&results)
    {
        let log_path = dir.join("log.txt");
        let mut log = case_lines.join("\n");
        log.push('\n');
        std::fs::write(&log_path, log)
            .with_context(|| format!("cannot write {}", log_path.display()))?;
        manifest.output(&log_path);

        let status = match *code {
            0 => "pass",
            1 => "fail",
            _ => "error",
        };
        manifest.verdict(&case.name, status);
        lines.push(format!("case {}: {} ({}), exit {code}", case.name, status, case.command));
        summary_cases.push(json!({
            "name": case.name,
            "command": case.command,
            "exit_code": code,
            "status": status,
        }));
        worst = match (worst, *code) {
            (2, _) | (_, 2) => 2,
            (a, b) => a.max(b),
        };
    }

    let summary_path = config.out_dir.join("summary.json");
    write_json(&summary_path, &json!({ "cases": summary_cases, "exit_code": worst }))?;
    manifest.output(&summary_path);
    manifest.write(&config.out_dir.join("sweep_manifest.json"))?;

    lines.push(format!(
        "sweep: {} cases, wrote {}",
        config.cases.len(),
        summary_path.display()
    ));
    Ok(Outcome::new(worst, lines))
}
