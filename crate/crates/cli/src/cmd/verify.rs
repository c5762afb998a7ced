//! `tdnls verify`: built-in consistency checks with pass/fail verdicts.
//!
//! Each case re-derives something the library claims from two independent
//! directions and compares: closed forms against the integrator, the grid
//! transform against the integrator, profile formulas against their
//! defining equations. Tolerances are fixed per case at roughly five to
//! fifty times the error observed on these exact configurations, so they
//! flag regressions rather than floating-point noise.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use tdnls_core::analytic::{
    max_pde_residual, ode_residual, reduction_residuals, standing_soliton, td_soliton,
    travelling_soliton, GaussianLine, SechLine, SelfSimilar,
};
use tdnls_core::expr;
use tdnls_core::{
    evolve, mass, pseudoconformal_field, ComplexField, EvolveConfig, Expr, GridSpec, MapDirection,
    F17,
};

use crate::cmd::{load_config, require, with_suffix, Outcome};
use crate::field_io::write_field;
use crate::manifest::{manifest_path, write_json, RunManifest};

const STANDING_TOL: f64 = 1e-5;
const TRAVELLING_TOL: f64 = 5e-5;
const TD_TOL: f64 = 1e-5;
const ANSATZ_TOL: f64 = 1e-10;
const PROFILE_TOL: f64 = 1e-12;
const REDUCTION_TOL: f64 = 1e-10;
const SQUARE_TOL: f64 = 1e-4;
const MASS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// Standing soliton against the integrator under F = 1
    Standing,
    /// Travelling soliton against the integrator under F = 1
    Travelling,
    /// Decaying soliton against the integrator under F = 1/t
    TdSoliton,
    /// Closed-form waves against the equation, point by point
    Ansatz,
    /// Profile equation g'' - g + g^3 = 0 and its self-similar lift
    OdeG,
    /// Evolve-then-map against map-then-evolve across the time inversion
    CommutingSquare,
}

impl Case {
    fn name(self) -> &'static str {
        match self {
            Case::Standing => "standing",
            Case::Travelling => "travelling",
            Case::TdSoliton => "td-soliton",
            Case::Ansatz => "ansatz",
            Case::OdeG => "ode-g",
            Case::CommutingSquare => "commuting-square",
        }
    }
}

#[derive(Args, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Which check to run
    #[arg(long, value_enum)]
    #[serde(default)]
    pub case: Option<Case>,

    /// Write a machine-readable JSON report here (plus a manifest next to it)
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,

    /// Also dump the compared fields as <prefix>_<name>.csv with columns
    /// t,x,re,im,abs (cases without grid fields dump nothing)
    #[arg(long)]
    #[serde(default)]
    pub dump: Option<PathBuf>,

    /// JSON file supplying any of the flags above; explicit flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl VerifyArgs {
    fn absorb(mut self, file: VerifyArgs) -> Self {
        self.case = self.case.or(file.case);
        self.out = self.out.or(file.out);
        self.dump = self.dump.or(file.dump);
        self
    }
}

struct CaseResult {
    pass: bool,
    lines: Vec<String>,
    measurements: Vec<(&'static str, f64)>,
    fields: Vec<(&'static str, ComplexField)>,
}

#[derive(serde::Serialize)]
struct VerifyOut<'a> {
    case: &'a str,
    verdict: &'a str,
    measurements: std::collections::BTreeMap<&'a str, F17>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

fn lattice(ts: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
    let mut points = Vec::with_capacity(ts.len() * xs.len());
    for &t in ts {
        for &x in xs {
            points.push((t, x));
        }
    }
    points
}

/// Wide enough that the sech tails sit at roundoff on the periodic box.
fn soliton_grid() -> Result<GridSpec> {
    Ok(GridSpec::new(-20.0 * PI, 20.0 * PI, 1024)?)
}

/// Evolves the exact solution `wave` of coupling `f` over `[t0, t1]` and
/// compares against its closed form at the far end.
fn soliton_case(
    label: &str,
    wave: &tdnls_core::analytic::AnalyticSolution,
    f: Expr,
    grid: GridSpec,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<CaseResult> {
    let start = ComplexField::from_wave(grid, wave, t0)?;
    let cfg = EvolveConfig::new(t0, t1, 1e-3, f);
    let end = evolve(&start, &cfg)?;
    let exact = ComplexField::from_wave(grid, wave, t1)?;
    let err = end.max_abs_diff(&exact);
    let drift = (mass(&end) - mass(&start)).abs();
    let pass = err < tol && drift < MASS_TOL;
    Ok(CaseResult {
        pass,
        lines: vec![
            format!("{label}: integrated t = {t0} -> {t1} at dt = 1e-3, n = {}", grid.n),
            format!("L-infinity error against the closed form: {err:.3e} (tolerance {tol:.1e})"),
            format!("mass drift: {drift:.3e} (tolerance {MASS_TOL:.1e})"),
        ],
        measurements: vec![
            ("linf_error", err),
            ("linf_tolerance", tol),
            ("mass_drift", drift),
            ("mass_tolerance", MASS_TOL),
        ],
        fields: vec![("computed", end), ("exact", exact)],
    })
}

fn case_standing() -> Result<CaseResult> {
    let grid = GridSpec::new(-8.0 * PI, 8.0 * PI, 256)?;
    soliton_case("standing soliton, F = 1", &standing_soliton(0.0), Expr::int(1), grid, 0.0, 1.0, STANDING_TOL)
}

fn case_travelling() -> Result<CaseResult> {
    let wave = travelling_soliton(1.0, 1.0)?;
    soliton_case("travelling soliton, F = 1", &wave, Expr::int(1), soliton_grid()?, 0.0, 1.0, TRAVELLING_TOL)
}

fn case_td_soliton() -> Result<CaseResult> {
    let f = expr::parse("1/t")?;
    soliton_case("decaying soliton, F = 1/t", &td_soliton(0.0), f, soliton_grid()?, 1.0, 2.0, TD_TOL)
}

fn case_ansatz() -> Result<CaseResult> {
    let unit = Expr::int(1);
    let recip = expr::parse("1/t")?;
    let xs = linspace(-6.0, 6.0, 25);
    let symmetric = lattice(&linspace(-0.9, 0.9, 7), &xs);
    let positive = lattice(&linspace(0.5, 3.0, 6), &xs);

    let standing = max_pde_residual(&standing_soliton(0.7), &unit, &symmetric)?;
    let travelling = max_pde_residual(&travelling_soliton(1.0, 1.0)?, &unit, &symmetric)?;
    let td = max_pde_residual(&td_soliton(0.0), &recip, &positive)?;
    let worst = standing.max(travelling).max(td);
    Ok(CaseResult {
        pass: worst < ANSATZ_TOL,
        lines: vec![
            format!("standing soliton residual over {} points: {standing:.3e}", symmetric.len()),
            format!("travelling soliton residual over {} points: {travelling:.3e}", symmetric.len()),
            format!("decaying soliton residual over {} points: {td:.3e}", positive.len()),
            format!("tolerance {ANSATZ_TOL:.1e} on each"),
        ],
        measurements: vec![
            ("standing_residual", standing),
            ("travelling_residual", travelling),
            ("td_residual", td),
            ("tolerance", ANSATZ_TOL),
        ],
        fields: vec![],
    })
}

fn case_ode_g() -> Result<CaseResult> {
    let ys = linspace(-10.0, 10.0, 201);
    let mut profile_worst: f64 = 0.0;
    for x0 in [0.0, 0.7] {
        let line = SechLine { x0 };
        for &y in &ys {
            profile_worst = profile_worst.max(ode_residual(&line, y).abs());
        }
    }
    // Negative control: a profile that does not solve the equation must
    // leave a visible residual, or the instrument is vacuous.
    let control = ys.iter().map(|&y| ode_residual(&GaussianLine, y).abs()).fold(0.0, f64::max);

    let amp = SelfSimilar { profile: SechLine { x0: 0.0 } };
    let mut reduction_worst: f64 = 0.0;
    for (t, x) in lattice(&linspace(0.5, 3.0, 6), &linspace(-4.0, 4.0, 21)) {
        let (r1, r2) = reduction_residuals(&amp, t, x);
        reduction_worst = reduction_worst.max(r1.abs()).max(r2.abs());
    }

    let pass = profile_worst < PROFILE_TOL && reduction_worst < REDUCTION_TOL && control > 0.1;
    Ok(CaseResult {
        pass,
        lines: vec![
            format!("profile equation residual over [-10, 10]: {profile_worst:.3e} (tolerance {PROFILE_TOL:.1e})"),
            format!("self-similar lift residuals: {reduction_worst:.3e} (tolerance {REDUCTION_TOL:.1e})"),
            format!("non-solution control residual: {control:.3e} (must exceed 1e-1)"),
        ],
        measurements: vec![
            ("profile_residual", profile_worst),
            ("profile_tolerance", PROFILE_TOL),
            ("reduction_residual", reduction_worst),
            ("reduction_tolerance", REDUCTION_TOL),
            ("control_residual", control),
        ],
        fields: vec![],
    })
}

fn case_commuting_square() -> Result<CaseResult> {
    let grid = soliton_grid()?;
    let start = ComplexField::from_wave(grid, &standing_soliton(0.0), -1.0)?;

    let evolve_then_map = {
        let cfg = EvolveConfig::new(-1.0, -0.5, 1e-3, Expr::int(1));
        let end = evolve(&start, &cfg)?;
        pseudoconformal_field(&end, MapDirection::Forward)?
    };
    let map_then_evolve = {
        let mapped = pseudoconformal_field(&start, MapDirection::Forward)?;
        let cfg = EvolveConfig::new(1.0, 2.0, 1e-3, expr::parse("1/t")?);
        evolve(&mapped.field, &cfg)?
    };

    // Both routes land at t = 2; compare inside the trusted central window.
    let window = 0.4 * grid.length();
    let mut err: f64 = 0.0;
    let mut used = 0usize;
    for (j, x) in grid.points().iter().enumerate() {
        if evolve_then_map.valid[j] && x.abs() <= window {
            let diff = evolve_then_map.field.samples()[j] - map_then_evolve.samples()[j];
            err = err.max(diff.norm());
            used += 1;
        }
    }
    let pass = err < SQUARE_TOL && used > grid.n / 2;
    Ok(CaseResult {
        pass,
        lines: vec![
            "route A: evolve under F = 1 from t' = -1 to t' = -1/2, then map to t = 2".to_string(),
            "route B: map to t = 1, then evolve under F = 1/t to t = 2".to_string(),
            format!("commuting-square error: {err:.3e} over {used} points (tolerance {SQUARE_TOL:.1e})"),
        ],
        measurements: vec![
            ("square_error", err),
            ("tolerance", SQUARE_TOL),
            ("points_compared", used as f64),
        ],
        fields: vec![
            ("evolve-then-map", evolve_then_map.field),
            ("map-then-evolve", map_then_evolve),
        ],
    })
}

pub fn run(mut args: VerifyArgs) -> Result<Outcome> {
    if let Some(path) = args.config.take() {
        args = args.absorb(load_config(&path)?);
    }
    let case = require(args.case, "--case")?;
    let mut manifest = RunManifest::new(
        "verify",
        json!({
            "case": case.name(),
            "out": args.out.as_ref().map(|p| p.display().to_string()),
            "dump": args.dump.as_ref().map(|p| p.display().to_string()),
        }),
    );
    let result = match case {
        Case::Standing => case_standing()?,
        Case::Travelling => case_travelling()?,
        Case::TdSoliton => case_td_soliton()?,
        Case::Ansatz => case_ansatz()?,
        Case::OdeG => case_ode_g()?,
        Case::CommutingSquare => case_commuting_square()?,
    };
    let verdict = if result.pass { "pass" } else { "fail" };
    let mut lines = result.lines;

    let mut written: Vec<PathBuf> = Vec::new();
    if let Some(out) = &args.out {
        let payload = VerifyOut {
            case: case.name(),
            verdict,
            measurements: result.measurements.iter().map(|&(k, v)| (k, F17(v))).collect(),
        };
        write_json(out, &payload)?;
        lines.push(format!("wrote {}", out.display()));
        written.push(out.clone());
    }
    if let Some(prefix) = &args.dump {
        for (name, field) in &result.fields {
            let path = with_suffix(prefix, &format!("_{name}.csv"));
            write_field(&path, field, true)?;
            lines.push(format!("dumped {}", path.display()));
            written.push(path);
        }
    }
    if let Some(anchor) = args.out.as_ref().or(args.dump.as_ref()) {
        manifest.verdict(case.name(), verdict);
        for path in &written {
            manifest.output(path);
        }
        manifest.write(&manifest_path(anchor))?;
    }

    lines.push(format!("verify {}: {verdict}", case.name()));
    Ok(Outcome::new(if result.pass { 0 } else { 1 }, lines))
}
