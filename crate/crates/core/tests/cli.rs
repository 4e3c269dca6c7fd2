// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaintransport"))
        .args(args)
        .env_remove("CHAINTRANSPORT_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn two_site_transfer_time() {
    let o = bin(&["transfer-time", "--n", "2", "--gamma-out", "2", "--state", "localized:1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "tau = 1.50000000 [hbar/Omega]");
}

#[test]
fn methods_agree() {
    let mut taus = Vec::new();
    for m in ["liouville", "nonhermitian", "integrate"] {
        let o = bin(&["transfer-time", "--n", "5", "--e0", "-0.2", "--method", m]);
        assert!(o.status.success(), "{m}: {}", stderr(&o));
        let v: f64 = stdout(&o).split_whitespace().nth(2).unwrap().parse().unwrap();
        taus.push(v);
    }
    assert!(((taus[0] - taus[1]) / taus[0]).abs() < 1e-6);
    assert!(((taus[0] - taus[2]) / taus[0]).abs() < 1e-5);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["transfer-time", "--n", "0"],
        vec!["transfer-time", "--state", "gaussian:3,-1"],
        vec!["transfer-time", "--method", "magic"],
        vec!["transfer-time", "--gamma-phi", "1", "--method", "nonhermitian"],
        vec!["sweep", "--n", "4"],
        vec!["sweep", "--axis1", "E0:cubic:0:1:3"],
        vec!["preset", "fig99", "--out", "/dev/null"],
        vec!["--jobs", "0", "spectrum"],
        vec!["spectrum", "--nonsense"],
    ] {
        let o = bin(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = bin(&["transfer-time", "--n", "0"]);
    let line: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(line["error"], "usage");
}

#[test]
fn solver_errors_exit_one() {
    let o = bin(&["transfer-time", "--n", "80", "--gamma-phi", "0.5"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let line: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(line["error"], "size_limit");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n = 2\ngamma_out = 4.0\nstate = \"localized:1\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    let a = bin(&["transfer-time", "--config", c, "--gamma-out", "2"]);
    assert_eq!(stdout(&a).trim(), "tau = 1.50000000 [hbar/Omega]");

    fs::write(&cfg, "n = 2\nwidths = [1.0]\n").unwrap();
    let b = bin(&["transfer-time", "--config", c]);
    assert_eq!(b.status.code(), Some(2));
    assert!(stderr(&b).contains("widths"));

    fs::write(&cfg, "n = 2\ncolour = 1\n").unwrap();
    assert_eq!(bin(&["spectrum", "--config", c]).status.code(), Some(2));
}

#[test]
fn outputs_echo_config_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let o = bin(&[
        "trajectory", "--n", "4", "--e0", "0.3", "--gamma-phi", "0.2", "--steps", "11", "--t-max", "5", "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&first).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "t,p0,p1,p2,p3,p4");
    assert_eq!(lines.count(), 11);

    let o = bin(&["trajectory", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(text, fs::read_to_string(&second).unwrap());
}

#[test]
fn sweep_csv_round_trip_and_provenance_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("s.csv");
    let second = dir.path().join("t.csv");
    let o = bin(&[
        "--jobs", "2", "sweep", "--n", "5", "--axis1", "E0:linear:-1:1:3", "--axis2", "gamma_out:log:0.5:5:2", "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("# provenance"));
    let text = fs::read_to_string(&first).unwrap();
    assert!(text.starts_with("# spec: {"));
    assert_eq!(text.lines().nth(1).unwrap(), "axis1,axis2,value,stderr,status");
    assert_eq!(text.lines().count(), 2 + 6);
    assert!(!text.contains("timestamp"));
    let o = bin(&["sweep", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(text, fs::read_to_string(&second).unwrap());
}

#[test]
fn spectrum_footer_checks_width_sum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = bin(&["spectrum", "--n", "6", "--e0", "0.3", "--gamma-out", "1.25", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let widths: f64 = text
        .lines()
        .skip(2)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((widths - 1.25).abs() < 1e-7);
    assert!(text.lines().last().unwrap().starts_with("# check: sum_width = 1.25000000"));
}

#[test]
fn current_vanishes_at_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.csv");
    let o = bin(&["current", "--n", "4", "--gamma-phi", "0.5", "--e0-max", "0.4", "--points", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("g = "));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "0,0"));
}

#[test]
fn small_preset_writes_panels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("app1.csv");
    let o = bin(&["preset", "app1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for suffix in ["n1", "n2", "n5", "n9"] {
        let text = fs::read_to_string(dir.path().join(format!("app1_{suffix}.csv"))).unwrap();
        assert!(text.starts_with("# spec: "));
        assert_eq!(text.lines().count(), 2 + 41);
    }
}
