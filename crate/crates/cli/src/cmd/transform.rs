//! `tdnls transform`: push a sampled field through a symmetry chain.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use tdnls_core::{apply_to_field, TransformSpec, F17};

use crate::cmd::{load_config, require, Outcome};
use crate::field_io::{read_field, write_field_rows};
use crate::manifest::{manifest_path, RunManifest};

#[derive(Args, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformArgs {
    /// Chain of primitives, semicolon separated: D(delta) dilates, E(kappa)
    /// expands, T(eps) translates time, B(c) boosts; "Dmap" is T(1);E(1);T(1)
    #[arg(long)]
    #[serde(default)]
    pub spec: Option<String>,

    /// Input field CSV with header t,x,re,im (one time, full uniform grid)
    #[arg(long)]
    #[serde(default)]
    pub input: Option<PathBuf>,

    /// Time the input is expected to carry; a mismatch is a config error
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub t: Option<F17>,

    /// Output CSV; rows outside the trusted central window are dropped, so
    /// the file is for inspection rather than re-simulation
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,

    /// JSON file supplying any of the flags above; explicit flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// The resolved flag set, echoed into the manifest.
#[derive(serde::Serialize)]
struct TransformParams {
    spec: String,
    input: String,
    t: F17,
    out: String,
}

impl TransformArgs {
    fn absorb(mut self, file: TransformArgs) -> Self {
        self.spec = self.spec.or(file.spec);
        self.input = self.input.or(file.input);
        self.t = self.t.or(file.t);
        self.out = self.out.or(file.out);
        self
    }
}

pub fn run(mut args: TransformArgs) -> Result<Outcome> {
    if let Some(path) = args.config.take() {
        args = args.absorb(load_config(&path)?);
    }
    let spec_src = require(args.spec, "--spec")?;
    let input = require(args.input, "--input")?;
    let t = require(args.t, "--t")?.0;
    let out = require(args.out, "--out")?;

    let mut manifest = RunManifest::new(
        "transform",
        TransformParams {
            spec: spec_src.clone(),
            input: input.display().to_string(),
            t: F17(t),
            out: out.display().to_string(),
        },
    );

    let field = read_field(&input)?;
    if (field.time() - t).abs() > 1e-9 * (1.0 + t.abs()) {
        bail!("input field is stamped t = {}, but --t = {}", field.time(), t);
    }
    let spec = TransformSpec::parse(&spec_src)
        .with_context(|| format!("cannot parse --spec {spec_src:?}"))?;

    let mapped = apply_to_field(&spec, &field)
        .with_context(|| format!("chain is not applicable at t = {t}"))?;
    let kept = mapped.valid.iter().filter(|&&v| v).count();
    write_field_rows(&out, &mapped.field, Some(&mapped.valid), false)?;

    manifest.output(&out);
    manifest.write(&manifest_path(&out))?;

    let lines = vec![
        format!("transform: {spec_src} maps t = {t} to t' = {}", mapped.field.time()),
        format!("kept {kept} of {} samples inside the trusted window", mapped.valid.len()),
        format!("wrote {}", out.display()),
    ];
    Ok(Outcome::new(0, lines))
}
