use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn paramarkov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paramarkov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ml_charfn_at_zero() {
    let out = paramarkov(&["law", "--charfn", "ml", "--alpha", "1", "--lambda", "2", "--xi", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("xi,re,im"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row, vec![0.0, 1.0, 0.0]);
}

#[test]
fn verify_eigenfunction_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = paramarkov(&[
        "verify",
        "--check",
        "eigenfunction",
        "--alpha",
        "0.5",
        "--lambda",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&out_dir.join("verify.json"));
    assert!(report["residual"].as_f64().unwrap() < 0.02);
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(read_json(&out_dir.join("verdict.json"))["pass"], Value::Bool(true));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = paramarkov(&["verify", "--check", "governing", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(read_json(&dir.path().join("verdict.json"))["pass"], Value::Bool(false));
}

#[test]
fn malformed_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "alpha = 0.5\nthis line has no equals sign\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = paramarkov(&[
        "law",
        "--survival",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());

    fs::write(&cfg, "alpha = 1.7\nsurvival = true\n").unwrap();
    let out = paramarkov(&["law", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# waiting time law\ncharfn = ml\nalpha = 1\nlambda = 3\nxi = 0, 1\n").unwrap();
    let from_file = paramarkov(&["law", "--config", cfg.to_str().unwrap()]);
    let overridden = paramarkov(&["law", "--config", cfg.to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(from_file.status.code(), Some(0));
    let value = |o: &Output| -> f64 {
        let s = String::from_utf8(o.stdout.clone()).unwrap();
        s.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap()
    };
    // λ / (λ + (−i)) has real part λ² / (λ² + 1)
    assert!((value(&from_file) - 0.9).abs() < 1e-15);
    assert!((value(&overridden) - 0.5).abs() < 1e-15);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = paramarkov(&[
            "simulate",
            "--alpha",
            "0.6",
            "--paths",
            "50",
            "--seed",
            "17",
            "--transition",
            "0.2,0.8;0.5,0.5",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(out_dir.join("paths.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert!(a.starts_with(b"path_id,epoch,state\n0,0.0000000000000000e0,0\n"));
}

#[test]
fn stable_law_from_spectral_file() {
    let family = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/dependent_family.json");
    let dir = tempfile::tempdir().unwrap();
    let out = paramarkov(&[
        "stable-law",
        "--spectral",
        family,
        "--xi",
        "1,-1;0.5,1",
        "--paths",
        "20000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("stable.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("xi,product_re,product_im,mc_re,mc_im,se,z,pass"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn ctrw_limit_and_selftest_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = paramarkov(&[
        "ctrw-limit",
        "--alpha",
        "0.5",
        "--xi",
        "1,0;1,1",
        "--n",
        "10,100",
        "--paths",
        "5000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("ctrw.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let out = paramarkov(&["selftest", "--criteria", "1,5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let results = read_json(&dir.path().join("selftest.json"));
    assert_eq!(results.as_array().unwrap().len(), 2);

    let out = paramarkov(&["selftest", "--criteria", "11"]);
    assert_eq!(out.status.code(), Some(2));
}
