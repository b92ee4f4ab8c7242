use std::process::{Command, Output};

use num_complex::Complex64 as C64;
use qtransfer::matrix::MatrixDump;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtransfer")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn c(v: &Value) -> C64 {
    C64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn verify_default_passes() {
    let out = run(&["verify", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json_of(&out);
    assert!(rep["records"].as_array().unwrap().len() >= 12);
    assert_eq!(rep["all_pass"], Value::Bool(true));
}

#[test]
fn regime_errors_exit_two() {
    let out = run(&["verify", "--set", "phi_re=0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--set", "s0=1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--set", "colour=red"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "# one site\nn = 1\nphi_re = -2.5\n").unwrap();
    let out = run(&["--config", path.to_str().unwrap(), "spectrum", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["eigenvalues"].as_array().unwrap().len(), 2);
}

#[test]
fn rmatrix_at_zero_is_scaled_permutation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["rmatrix", "--u", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let m = MatrixDump::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap().to_matrix().unwrap();
    let back = MatrixDump::from_json(&MatrixDump::from_matrix(&m).to_json()).unwrap().to_matrix().unwrap();
    assert_eq!(m, back);
    let kappa = 0.6 - 1.0 / 0.6;
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (i / 2, i % 2);
            let expect = if j == 2 * b + a { kappa } else { 0.0 };
            assert!((m[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-14, "entry {i},{j}");
        }
    }
}

#[test]
fn partition_brute_matches_transfer() {
    let out = run(&["partition", "--rows", "2", "--brute", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let (t, b) = (c(&v["transfer"]), c(&v["brute"]));
    assert!((t - b).norm() <= 1e-10 * t.norm());
}

#[test]
fn single_site_bethe_root() {
    let out = run(&["--set", "n=1", "bethe", "--p", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let states = json_of(&out)["states"].clone();
    let states = states.as_array().unwrap();
    assert_eq!(states.len(), 1);
    let w = c(&states[0]["roots"][0]);
    let (hbar, phi) = (0.6f64.ln(), -3.0);
    let expect = ((hbar * (2.0 * phi - 1.0)).exp() - 1.0) / ((hbar * (2.0 * phi + 1.0)).exp() - 1.0);
    let got = (C64::new(2.0 * hbar, 0.0) * w).exp();
    assert!((got - expect).norm() < 1e-10 * expect.abs(), "{got} vs {expect}");
}

#[test]
fn verify_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["--set", "n=1", "verify", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn bad_sector_is_rejected() {
    let out = run(&["--set", "n=1", "bethe", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
