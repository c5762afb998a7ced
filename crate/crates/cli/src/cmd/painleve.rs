//! `tdnls painleve`: singularity-structure test for a coupling formula.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tdnls_core::expr;
use tdnls_core::painleve::{painleve_check_with, PainleveReport, Verdict};

use crate::cmd::{load_config, require, Outcome};
use crate::manifest::{manifest_path, write_json, RunManifest};

#[derive(Args, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PainleveArgs {
    /// Coupling formula F(t), e.g. "1/(2*t+3)"
    #[arg(long = "F")]
    #[serde(rename = "F", default)]
    pub coupling: Option<String>,

    /// Witness for the singularity location psi(t); the verdict does not
    /// depend on it [default: t^2]
    #[arg(long)]
    #[serde(default)]
    pub psi: Option<String>,

    /// Witness for the leading coefficient u0(t) [default: 1]
    #[arg(long)]
    #[serde(default)]
    pub u0: Option<String>,

    /// Write a machine-readable JSON report here (plus a manifest next to it)
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,

    /// JSON file supplying any of the flags above; explicit flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl PainleveArgs {
    fn absorb(mut self, file: PainleveArgs) -> Self {
        self.coupling = self.coupling.or(file.coupling);
        self.psi = self.psi.or(file.psi);
        self.u0 = self.u0.or(file.u0);
        self.out = self.out.or(file.out);
        self
    }
}

#[derive(Serialize)]
struct PainleveOut<'a> {
    formula: &'a str,
    psi: &'a str,
    u0: &'a str,
    report: &'a PainleveReport,
}

pub fn run(mut args: PainleveArgs) -> Result<Outcome> {
    if let Some(path) = args.config.take() {
        args = args.absorb(load_config(&path)?);
    }
    let formula = require(args.coupling, "--F")?;
    let psi_src = args.psi.unwrap_or_else(|| "t^2".to_string());
    let u0_src = args.u0.unwrap_or_else(|| "1".to_string());

    let mut manifest = RunManifest::new(
        "painleve",
        json!({
            "F": &formula,
            "psi": &psi_src,
            "u0": &u0_src,
            "out": args.out.as_ref().map(|p| p.display().to_string()),
        }),
    );

    let f = expr::parse(&formula).with_context(|| format!("cannot parse --F {formula:?}"))?;
    let psi = expr::parse(&psi_src).with_context(|| format!("cannot parse --psi {psi_src:?}"))?;
    let u0 = expr::parse(&u0_src).with_context(|| format!("cannot parse --u0 {u0_src:?}"))?;
    let report = painleve_check_with(&f, &psi, &u0)
        .with_context(|| format!("test failed to run on F = {formula}"))?;

    let resonances: Vec<String> = report.resonances.iter().map(i64::to_string).collect();
    let mut lines = vec![
        format!("coupling F(t) = {formula}"),
        format!("  leading exponents: p = {}, q = {}", report.leading.p, report.leading.q),
        format!("  resonances: {}", resonances.join(", ")),
        format!("  order-3 compatibility residual: {:.3e}", report.n3_residual_norm.0),
        format!("  order-4 compatibility identically zero: {}", report.n4_identically_zero),
        format!("  constraint 2*F'^2 - F*F'' reduces to: {}", report.constraint_residual),
        format!("verdict: {}", report.verdict),
    ];

    if let Some(out) = &args.out {
        let payload = PainleveOut { formula: &formula, psi: &psi_src, u0: &u0_src, report: &report };
        write_json(out, &payload)?;
        manifest.verdict("painleve", report.verdict.to_string());
        manifest.output(out);
        manifest.write(&manifest_path(out))?;
        lines.push(format!("wrote {}", out.display()));
    }

    let code = match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
    };
    Ok(Outcome::new(code, lines))
}
