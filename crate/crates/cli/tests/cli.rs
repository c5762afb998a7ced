//! End-to-end tests driving the compiled binary: exit codes, report
//! determinism, manifests, config merging, and agreement with the library.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tdnls_core::analytic::standing_soliton;
use tdnls_core::{apply_to_field, ComplexField, GridSpec, TransformSpec};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdnls")).args(args).output().expect("spawn tdnls")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdnls"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn tdnls")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn painleve_exit_codes_follow_the_verdict() {
    for f in ["1/t", "1/(2*t+3)", "1/(-t+5)", "1"] {
        let out = run(&["painleve", "--F", f]);
        assert_eq!(code(&out), 0, "{f}: {}", stdout(&out));
        assert!(stdout(&out).contains("verdict: pass"), "{f}");
    }
    for f in ["t", "t^2", "1/(t^2+1)"] {
        let out = run(&["painleve", "--F", f]);
        assert_eq!(code(&out), 1, "{f}: {}", stdout(&out));
        assert!(stdout(&out).contains("verdict: fail"), "{f}");
    }
    let out = run(&["painleve", "--F", "1/("]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("parse"), "{}", stderr(&out));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");

    let out = run(&["painleve", "--F", "1/(2*t+3)", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["painleve", "--F", "1/(2*t+3)", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "painleve report drifted");

    let out = run(&["verify", "--case", "ode-g", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = run(&["verify", "--case", "ode-g", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "verify report drifted");
}

#[test]
fn simulate_writes_dumps_run_summary_and_accurate_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--F",
        "1",
        "--t0",
        "0",
        "--t1",
        "0.05",
        "--dt",
        "0.01",
        "--nx",
        "64",
        "--xmin",
        "-16",
        "--xmax",
        "16",
        "--init",
        "standing:x0=0.5",
        "--dump-every",
        "2",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // 5 steps: dumps at step 0, 2, 4, and the final state at step 5.
    for name in ["sim_0000.csv", "sim_0001.csv", "sim_0002.csv", "sim_0003.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    assert!(!dir.path().join("sim_0004.csv").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim_run.json")).unwrap())
            .unwrap();
    assert_eq!(summary["steps"], serde_json::json!(5));
    assert_eq!(summary["dumps"].as_array().unwrap().len(), 4);
    assert!(summary["mass_drift"].as_f64().unwrap() < 1e-10);
    let series = summary["series"].as_array().unwrap();
    assert_eq!(series.first().unwrap()["t"].as_f64().unwrap(), 0.0);
    assert_eq!(series.last().unwrap()["t"].as_f64().unwrap(), 0.05);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["subcommand"], serde_json::json!("simulate"));
    assert_eq!(manifest["tool_version"], serde_json::json!(env!("CARGO_PKG_VERSION")));
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 5, "4 dumps + run summary");
    for entry in outputs {
        let path = Path::new(entry["path"].as_str().unwrap());
        let bytes = entry["bytes"].as_u64().unwrap();
        assert_eq!(fs::metadata(path).unwrap().len(), bytes, "{}", path.display());
    }
}

#[test]
fn config_file_supplies_flags_and_explicit_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("painleve.json");
    fs::write(&config, r#"{ "F": "t", "out": "rep.json" }"#).unwrap();

    let out = run_in(dir.path(), &["painleve", "--config", "painleve.json"]);
    assert_eq!(code(&out), 1, "config-supplied F = t must fail: {}", stdout(&out));
    assert!(dir.path().join("rep.json").exists(), "config-supplied out ignored");

    let out = run_in(dir.path(), &["painleve", "--config", "painleve.json", "--F", "1/t"]);
    assert_eq!(code(&out), 0, "explicit --F must override the config");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(report["formula"], serde_json::json!("1/t"));

    fs::write(&config, r#"{ "F": "1/t", "unknown_flag": 3 }"#).unwrap();
    let out = run_in(dir.path(), &["painleve", "--config", "painleve.json"]);
    assert_eq!(code(&out), 2, "unknown config keys are config errors");
}

fn write_field_csv(path: &Path, field: &ComplexField) {
    let mut text = String::from("t,x,re,im\n");
    for (x, u) in field.grid().points().iter().zip(field.samples()) {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            field.time(),
            x,
            u.re,
            u.im
        ));
    }
    fs::write(path, text).unwrap();
}

fn read_field_csv(path: &Path) -> Vec<(f64, f64, f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2], v[3])
        })
        .collect()
}

#[test]
fn transform_agrees_with_the_library_and_checks_the_time_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("field.csv");
    let output = dir.path().join("mapped.csv");

    let grid = GridSpec::new(-16.0, 16.0, 64).unwrap();
    let field = ComplexField::from_wave(grid, &standing_soliton(0.0), -1.0).unwrap();
    write_field_csv(&input, &field);

    let out = run(&[
        "transform",
        "--spec",
        "Dmap",
        "--input",
        input.to_str().unwrap(),
        "--t",
        "-1",
        "--out",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let expected = apply_to_field(&TransformSpec::parse("Dmap").unwrap(), &field).unwrap();
    let kept: Vec<usize> =
        (0..grid.n).filter(|&j| expected.valid[j]).collect();
    let rows = read_field_csv(&output);
    assert_eq!(rows.len(), kept.len(), "row count differs from the valid mask");
    let points = grid.points();
    for (row, &j) in rows.iter().zip(&kept) {
        assert_eq!(row.0, expected.field.time());
        assert_eq!(row.1, points[j]);
        let u = expected.field.samples()[j];
        assert_eq!((row.2, row.3), (u.re, u.im), "sample {j} differs");
    }

    let out = run(&[
        "transform",
        "--spec",
        "Dmap",
        "--input",
        input.to_str().unwrap(),
        "--t",
        "-0.5",
        "--out",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "time mismatch must be a config error");
    assert!(stderr(&out).contains("stamped"), "{}", stderr(&out));
}

#[test]
fn simulate_accepts_its_own_dumps_as_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("leg1");
    let out = run(&[
        "simulate",
        "--F",
        "1",
        "--t0",
        "0",
        "--t1",
        "0.1",
        "--dt",
        "0.01",
        "--nx",
        "64",
        "--xmin",
        "-16",
        "--xmax",
        "16",
        "--init",
        "standing",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let final_dump = dir.path().join("leg1_0001.csv");
    assert!(final_dump.exists());

    let second = dir.path().join("leg2");
    let init = format!("file:{}", final_dump.display());
    let out = run(&[
        "simulate",
        "--F",
        "1",
        "--t0",
        "0.1",
        "--t1",
        "0.2",
        "--dt",
        "0.01",
        "--init",
        &init,
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "restart from dump failed: {}", stderr(&out));

    // The file carries its own grid, so respinning the grid flags conflict,
    // and a wrong start time is rejected.
    let out = run(&[
        "simulate", "--F", "1", "--t0", "0.1", "--t1", "0.2", "--dt", "0.01", "--nx", "64",
        "--init", &init, "--out", second.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "simulate", "--F", "1", "--t0", "0", "--t1", "0.2", "--dt", "0.01", "--init", &init,
        "--out", second.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("stamped"), "{}", stderr(&out));
}

#[test]
fn sweep_runs_each_case_in_its_own_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    fs::write(
        &config,
        format!(
            r#"{{
  "out_dir": "{}",
  "cases": [
    {{ "name": "good", "command": "painleve", "args": {{ "F": "1/(2*t+3)" }} }},
    {{ "name": "bad", "command": "painleve", "args": {{ "F": "t^2" }} }},
    {{ "name": "profile", "command": "verify", "args": {{ "case": "ode-g" }} }}
  ]
}}"#,
            dir.path().join("runs").display()
        ),
    )
    .unwrap();

    let out = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "one failing case fails the sweep: {}", stderr(&out));

    let runs = dir.path().join("runs");
    for case in ["good", "bad", "profile"] {
        assert!(runs.join(case).join("log.txt").exists(), "{case} log missing");
        assert!(runs.join(case).join("report.json").exists(), "{case} report missing");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(runs.join("summary.json")).unwrap()).unwrap();
    let cases = summary["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 3);
    assert_eq!(cases[0]["status"], serde_json::json!("pass"));
    assert_eq!(cases[1]["status"], serde_json::json!("fail"));
    assert_eq!(cases[2]["status"], serde_json::json!("pass"));
    assert_eq!(summary["exit_code"], serde_json::json!(1));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(runs.join("sweep_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["verdicts"]["bad"], serde_json::json!("fail"));
    for entry in manifest["outputs"].as_array().unwrap() {
        let path = Path::new(entry["path"].as_str().unwrap());
        assert_eq!(fs::metadata(path).unwrap().len(), entry["bytes"].as_u64().unwrap());
    }
}

#[test]
fn usage_errors_exit_with_code_two() {
    // Missing required value, wrong enum value, bad init spec, missing file.
    let out = run(&["verify"]);
    assert_eq!(code(&out), 2);
    let out = run(&["verify", "--case", "bogus"]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "simulate", "--F", "1", "--t0", "0", "--t1", "0.1", "--dt", "0.01", "--nx", "64",
        "--xmin", "-16", "--xmax", "16", "--init", "vortex", "--out", "/tmp/x",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("init"), "{}", stderr(&out));
    let out = run(&["painleve", "--config", "/nonexistent/config.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn every_subcommand_documents_its_flags_in_help() {
    let expectations: &[(&str, &[&str])] = &[
        ("painleve", &["--F", "--psi", "--u0", "--out", "--config"]),
        (
            "simulate",
            &[
                "--F",
                "--t0",
                "--t1",
                "--dt",
                "--nx",
                "--xmin",
                "--xmax",
                "--init",
                "--dump-every",
                "--pole-guard",
                "--out",
                "--config",
            ],
        ),
        ("verify", &["--case", "--out", "--dump", "--config"]),
        ("transform", &["--spec", "--input", "--t", "--out", "--config"]),
        ("sweep", &["--config"]),
    ];
    for (sub, flags) in expectations {
        let out = run(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub} --help");
        let text = stdout(&out);
        for flag in *flags {
            assert!(text.contains(flag), "{sub} --help does not document {flag}");
        }
    }
}
