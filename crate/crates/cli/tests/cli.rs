#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shadow-hopf"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .env_remove("SHADOW_HOPF_OUT")
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
fn exact_prints_seventeen_digit_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["exact", "--eps", "0.2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let tau_line = out.lines().find(|l| l.starts_with("tau_n=")).unwrap();
    assert_eq!(tau_line.len(), "tau_n=".len() + 18, "{tau_line}");
    assert!(out.contains("period=38.92992065149635"));
    assert!(out.contains("valid=true"));
}

#[test]
fn exact_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["exact", "--eps", "0.1", "--n", "2", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    assert!(lines[0].contains("tau_n"));
}

#[test]
fn exact_domain_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["exact", "--eps", "0.4", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no 1-layer stationary solution"));
}

#[test]
fn hypothesis_violation_exits_2_with_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["exact", "--eps", "0.3", "--alpha", "0.001"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("valid=false"));
    assert!(out.contains("chi_n="));
    assert!(!out.contains("tau_n="));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["exact"],
        vec!["exact", "--eps", "abc"],
        vec!["frobnicate"],
        vec!["reproduce", "z9"],
        vec!["exact", "--eps", "0.2", "--gamma", "-1"],
    ] {
        let o = run_in(dir.path(), &args);
        assert_eq!(o.status.code(), Some(64), "{args:?}: {}", stderr(&o));
    }
    let o = run_in(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn invalid_config_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.cfg"),
        "eps = 0.5\ntau = -1\nt_end = 0\ncolour = red\n",
    )
    .unwrap();
    let o = run_in(dir.path(), &["simulate", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(64));
    let err = stderr(&o);
    for needle in ["colour", "tau", "t_end", "eps = 0.5"] {
        assert!(err.contains(needle), "missing {needle}: {err}");
    }
}

#[test]
fn simulate_uses_output_root_variable() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("short.cfg"),
        "eps = 0.2\ntau = 6\nt_end = 2\n",
    )
    .unwrap();
    let o = bin()
        .args(["simulate", "short.cfg"])
        .current_dir(dir.path())
        .env("SHADOW_HOPF_OUT", "results")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = dir.path().join("results/short");
    assert!(run.join("trajectory.csv").exists());
    assert!(run.join("summary.txt").exists());
    assert!(stdout(&o).contains("final_layers=1"));

    let o = run_in(dir.path(), &["simulate", "short.cfg"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("out/short/config.txt").exists());
}

#[test]
fn blow_up_exits_1_with_last_time() {
    let dir = tempfile::tempdir().unwrap();
    let samples: String = (0..21).map(|_| "100\n").collect();
    fs::write(dir.path().join("u0.txt"), samples).unwrap();
    fs::write(
        dir.path().join("blow.cfg"),
        "eps = 0.2\ntau = 6\nt_end = 10\nnodes = 21\ndt = 0.1\ninitial = custom\nsamples = u0.txt\n",
    )
    .unwrap();
    let o = run_in(dir.path(), &["simulate", "blow.cfg", "--out", "b"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("non-finite state after t ="),
        "{}",
        stderr(&o)
    );
}

fn write_sine(path: &Path, period: f64, t_end: f64) {
    let mut text = String::from("t,mean_u,xi\n");
    let mut k = 0;
    loop {
        let t = k as f64 * 0.1;
        if t > t_end {
            break;
        }
        text.push_str(&format!("{t},{},0\n", 0.2 * (2.0 * PI * t / period).sin()));
        k += 1;
    }
    fs::write(path, text).unwrap();
}

#[test]
fn analyze_synthetic_sine() {
    let dir = tempfile::tempdir().unwrap();
    write_sine(&dir.path().join("sine.csv"), 38.929920651496360, 400.0);
    let o = run_in(
        dir.path(),
        &["analyze", "sine.csv", "--eps", "0.2", "--skip", "0"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let err: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("first_relative_error_pct="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err.abs() < 0.1, "{err}");
    assert!(dir.path().join("analysis.csv").exists());
    assert!(dir.path().join("analysis_summary.txt").exists());
}

#[test]
fn analyze_too_few_cycles_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    write_sine(&dir.path().join("short.csv"), 40.0, 50.0);
    let o = run_in(
        dir.path(),
        &["analyze", "short.csv", "--exact-period", "40"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("too few oscillation cycles"));
    let o = run_in(dir.path(), &["analyze", "short.csv"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn reproduce_sweep_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["reproduce", "sweep", "--out", "r"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["sweep.csv", "check.txt", "summary.txt"] {
        assert!(dir.path().join("r/sweep").join(f).exists(), "{f}");
    }
    assert!(fs::read_to_string(dir.path().join("r/sweep/check.txt"))
        .unwrap()
        .contains("pass=true"));
}
