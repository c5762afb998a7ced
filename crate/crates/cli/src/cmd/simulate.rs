//! `tdnls simulate`: split-step integration with CSV field dumps and a JSON
//! run summary (grid, steps, mass/energy series).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use tdnls_core::analytic::{standing_soliton, td_soliton_on, travelling_soliton, TimeBranch};
use tdnls_core::expr;
use tdnls_core::{energy, evolve_observed, mass, ComplexField, EvolveConfig, Expr, GridSpec, F17};

use crate::cmd::{load_config, require, with_suffix, Outcome};
use crate::field_io::{read_field, write_field};
use crate::manifest::{manifest_path, write_json, RunManifest};

/// Cap on the length of the mass/energy series in the run summary; long runs
/// are thinned to roughly this many samples.
const SERIES_CAP: usize = 1000;

#[derive(Args, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Coupling formula F(t), e.g. "1", "1/t", "1/(2*t+3)", "sin(t)"
    #[arg(long = "F")]
    #[serde(rename = "F", default)]
    pub coupling: Option<String>,

    /// Start time
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub t0: Option<F17>,

    /// End time (may be less than t0 to run backwards)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub t1: Option<F17>,

    /// Time step magnitude
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub dt: Option<F17>,

    /// Number of grid points; must be a power of two
    #[arg(long)]
    #[serde(default)]
    pub nx: Option<usize>,

    /// Left edge of the periodic box
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub xmin: Option<F17>,

    /// Right edge of the periodic box
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub xmax: Option<F17>,

    /// Initial state: "standing[:x0=..]", "travelling[:k=..,v=..]",
    /// "td[:x0=..]", or "file:<csv>" (which carries its own grid)
    #[arg(long)]
    #[serde(default)]
    pub init: Option<String>,

    /// Dump the field every K steps; 0 dumps only the first and last states
    /// [default: 0]
    #[arg(long = "dump-every")]
    #[serde(rename = "dump-every", default)]
    pub dump_every: Option<usize>,

    /// Reject time windows closer than this to a pole of F
    #[arg(long = "pole-guard", allow_negative_numbers = true)]
    #[serde(rename = "pole-guard", default)]
    pub pole_guard: Option<F17>,

    /// Output prefix: writes <prefix>_NNNN.csv dumps, <prefix>_run.json,
    /// and <prefix>_manifest.json
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,

    /// JSON file supplying any of the flags above; explicit flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl SimulateArgs {
    fn absorb(mut self, file: SimulateArgs) -> Self {
        self.coupling = self.coupling.or(file.coupling);
        self.t0 = self.t0.or(file.t0);
        self.t1 = self.t1.or(file.t1);
        self.dt = self.dt.or(file.dt);
        self.nx = self.nx.or(file.nx);
        self.xmin = self.xmin.or(file.xmin);
        self.xmax = self.xmax.or(file.xmax);
        self.init = self.init.or(file.init);
        self.dump_every = self.dump_every.or(file.dump_every);
        self.pole_guard = self.pole_guard.or(file.pole_guard);
        self.out = self.out.or(file.out);
        self
    }
}

fn parse_init_params(rest: &str, allowed: &[&str]) -> Result<BTreeMap<String, f64>> {
    let mut params = BTreeMap::new();
    if rest.trim().is_empty() {
        return Ok(params);
    }
    for piece in rest.split(',') {
        let (key, value) = piece
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value in init parameter {piece:?}"))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            bail!("unknown init parameter {key:?}; allowed: {}", allowed.join(", "));
        }
        let value: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("bad number for init parameter {key}"))?;
        if params.insert(key.to_string(), value).is_some() {
            bail!("init parameter {key:?} given twice");
        }
    }
    Ok(params)
}

/// Builds the initial field for a non-file init spec.
fn soliton_init(spec: &str, grid: GridSpec, t0: f64) -> Result<ComplexField> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let field = match kind {
        "standing" => {
            let params = parse_init_params(rest, &["x0"])?;
            let x0 = params.get("x0").copied().unwrap_or(0.0);
            ComplexField::from_wave(grid, &standing_soliton(x0), t0)?
        }
        "travelling" => {
            let params = parse_init_params(rest, &["k", "v"])?;
            let k = params.get("k").copied().unwrap_or(1.0);
            let v = params.get("v").copied().unwrap_or(1.0);
            let wave = travelling_soliton(k, v)?;
            ComplexField::from_wave(grid, &wave, t0)?
        }
        "td" => {
            let params = parse_init_params(rest, &["x0"])?;
            let x0 = params.get("x0").copied().unwrap_or(0.0);
            if t0 == 0.0 {
                bail!("the td profile is singular at t = 0; start elsewhere");
            }
            let branch = if t0 > 0.0 { TimeBranch::Positive } else { TimeBranch::Negative };
            ComplexField::from_wave(grid, &td_soliton_on(x0, branch), t0)?
        }
        other => bail!(
            "unknown init kind {other:?}; expected standing, travelling, td, or file:<csv>"
        ),
    };
    Ok(field)
}

/// The resolved flag set, echoed into the manifest.
#[derive(Serialize)]
struct SimulateParams {
    #[serde(rename = "F")]
    formula: String,
    init: String,
    t0: F17,
    t1: F17,
    dt: F17,
    nx: usize,
    xmin: F17,
    xmax: F17,
    #[serde(rename = "dump-every")]
    dump_every: usize,
    #[serde(rename = "pole-guard")]
    pole_guard: F17,
    out: String,
}

#[derive(Serialize)]
struct SeriesPoint {
    t: F17,
    mass: F17,
    energy: F17,
}

#[derive(Serialize)]
struct DumpEntry {
    file: String,
    t: F17,
}

#[derive(Serialize)]
struct GridInfo {
    x_min: F17,
    x_max: F17,
    n: usize,
}

#[derive(Serialize)]
struct RunSummary {
    formula: String,
    init: String,
    t0: F17,
    t1: F17,
    dt: F17,
    pole_guard: F17,
    grid: GridInfo,
    steps: usize,
    mass_drift: F17,
    series: Vec<SeriesPoint>,
    dumps: Vec<DumpEntry>,
}

pub fn run(mut args: SimulateArgs) -> Result<Outcome> {
    if let Some(path) = args.config.take() {
        args = args.absorb(load_config(&path)?);
    }
    let formula = require(args.coupling, "--F")?;
    let init = require(args.init, "--init")?;
    let t0 = require(args.t0, "--t0")?.0;
    let t1 = require(args.t1, "--t1")?.0;
    let dt = require(args.dt, "--dt")?.0;
    let out = require(args.out, "--out")?;

    let initial = if let Some(path) = init.strip_prefix("file:") {
        if args.nx.is_some() || args.xmin.is_some() || args.xmax.is_some() {
            bail!("--init file:... carries its own grid; drop --nx/--xmin/--xmax");
        }
        let field = read_field(Path::new(path))?;
        if (field.time() - t0).abs() > 1e-9 * (1.0 + t0.abs()) {
            bail!("initial field is stamped t = {}, but --t0 = {}", field.time(), t0);
        }
        field
    } else {
        let nx = require(args.nx, "--nx")?;
        let xmin = require(args.xmin, "--xmin")?.0;
        let xmax = require(args.xmax, "--xmax")?.0;
        let grid = GridSpec::new(xmin, xmax, nx)?;
        soliton_init(&init, grid, t0)?
    };
    let grid = *initial.grid();

    let coupling = expr::parse(&formula).with_context(|| format!("cannot parse --F {formula:?}"))?;
    let mut cfg = EvolveConfig::new(t0, t1, dt, coupling.clone());
    if let Some(guard) = args.pole_guard {
        cfg.pole_guard = guard.0;
    }

    let dump_every = args.dump_every.unwrap_or(0);
    let mut manifest = RunManifest::new(
        "simulate",
        SimulateParams {
            formula: formula.clone(),
            init: init.clone(),
            t0: F17(t0),
            t1: F17(t1),
            dt: F17(dt),
            nx: grid.n,
            xmin: F17(grid.x_min),
            xmax: F17(grid.x_max),
            dump_every,
            pole_guard: F17(cfg.pole_guard),
            out: out.display().to_string(),
        },
    );

    let coupling_at = |t: f64, c: &Expr| -> Result<f64> {
        Ok(c.evaluate_real(t)
            .with_context(|| format!("coupling is not evaluable at t = {t}"))?
            .re)
    };

    let estimated_steps = ((t1 - t0) / dt).abs().ceil().max(1.0) as usize;
    let series_stride = (estimated_steps / SERIES_CAP).max(1);

    let mut series = vec![SeriesPoint {
        t: F17(t0),
        mass: F17(mass(&initial)),
        energy: F17(energy(&initial, coupling_at(t0, &coupling)?)),
    }];
    let mut dumps: Vec<DumpEntry> = Vec::new();

    let dump = |index: usize, field: &ComplexField, dumps: &mut Vec<DumpEntry>| -> Result<()> {
        let path = with_suffix(&out, &format!("_{index:04}.csv"));
        write_field(&path, field, false)?;
        dumps.push(DumpEntry { file: path.display().to_string(), t: F17(field.time()) });
        Ok(())
    };
    dump(0, &initial, &mut dumps)?;

    let mut step = 0usize;
    let mut last_dumped_step = 0usize;
    let mut deferred: Option<anyhow::Error> = None;
    let final_field = evolve_observed(&initial, &cfg, |field| {
        step += 1;
        if deferred.is_some() {
            return;
        }
        if step % series_stride == 0 {
            match coupling_at(field.time(), &coupling) {
                Ok(f_val) => series.push(SeriesPoint {
                    t: F17(field.time()),
                    mass: F17(mass(field)),
                    energy: F17(energy(field, f_val)),
                }),
                Err(err) => deferred = Some(err),
            }
        }
        if dump_every > 0 && step % dump_every == 0 {
            last_dumped_step = step;
            if let Err(err) = dump(dumps.len(), field, &mut dumps) {
                deferred = Some(err);
            }
        }
    })?;
    if let Some(err) = deferred {
        return Err(err);
    }

    if last_dumped_step != step {
        dump(dumps.len(), &final_field, &mut dumps)?;
    }
    if series.last().is_none_or(|p| p.t.0 != final_field.time()) {
        series.push(SeriesPoint {
            t: F17(final_field.time()),
            mass: F17(mass(&final_field)),
            energy: F17(energy(&final_field, coupling_at(final_field.time(), &coupling)?)),
        });
    }

    let mass_drift = (mass(&final_field) - series[0].mass.0).abs();
    let summary = RunSummary {
        formula: formula.clone(),
        init: init.clone(),
        t0: F17(t0),
        t1: F17(t1),
        dt: F17(dt),
        pole_guard: F17(cfg.pole_guard),
        grid: GridInfo { x_min: F17(grid.x_min), x_max: F17(grid.x_max), n: grid.n },
        steps: step,
        mass_drift: F17(mass_drift),
        series,
        dumps,
    };
    let run_path = with_suffix(&out, "_run.json");
    write_json(&run_path, &summary)?;

    for entry in &summary.dumps {
        manifest.output(Path::new(&entry.file));
    }
    manifest.output(&run_path);
    manifest.write(&manifest_path(&out))?;

    let lines = vec![
        format!("simulate: F(t) = {formula}, t = {t0} -> {t1}, {step} steps of dt = {dt}"),
        format!("grid: [{}, {}) with n = {}", grid.x_min, grid.x_max, grid.n),
        format!("mass drift {mass_drift:.3e} over the run"),
        format!("wrote {} field dumps and {}", summary.dumps.len(), run_path.display()),
    ];
    Ok(Outcome::new(0, lines))
}
