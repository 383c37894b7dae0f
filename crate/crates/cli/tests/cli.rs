use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sturm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sturm")).args(args).arg("--out").arg(out).output().expect("run sturm")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn close(v: &Value, want: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() < 1e-10
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sturm(&["analyze", "--q", "constant:1", "--a", "1,2", "--domain", "-10:10"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&dir.path().join("profile.json"));
    assert_eq!(rep["schema_version"], 1);
    assert!(close(&rep["d0_estimate"], 1.0));
    assert!(close(&rep["m_table"][1]["m"], 4.0));
    assert!(dir.path().join("profile.csv").exists());
    assert!(dir.path().join("profile.meta.json").exists());

    let o = sturm(&["analyze", "--q", "example17:0.5", "--domain", "0:10000"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("drops"));

    assert_eq!(code(&sturm(&["analyze", "--q", "constant:0"], dir.path())), 2);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["analyze", "--q", "constant:abc"][..],
        &["analyze", "--q", "nonsense:1"],
        &["analyze"],
        &["analyze", "--q", "constant:1", "--domain", "5:1"],
        &["analyze", "--q", "constant:1", "--n", "4"],
        &["solve", "--q", "constant:1", "--f", "gaussian:0"],
        &["solve", "--q", "constant:1", "--p", "0.5"],
        &["frobnicate"],
        &["reproduce", "--example", "9"],
        &["reproduce", "--example", "1.8", "--alpha", "3", "--beta", "1", "--p", "2"],
    ] {
        let o = sturm(args, dir.path());
        assert_eq!(code(&o), 64, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sturm(&["solve", "--q", "constant:1", "--f", "expabs:1", "--p", "2"], dir.path());
    assert_eq!(code(&o), 0);
    let rep = read_json(&dir.path().join("solve.json"));
    assert!(rep["max_deviation"].as_f64().unwrap() <= 1e-4);
    let mut rdr = csv::Reader::from_path(dir.path().join("solve_0_green.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x", "y", "dy", "d2y"]);
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let x: f64 = rec[0].parse().unwrap();
        let y: f64 = rec[1].parse().unwrap();
        if x.abs() <= 12.0 {
            assert!((y - 0.5 * (1.0 + x.abs()) * (-x.abs()).exp()).abs() < 1e-4);
        }
    }

    let o = sturm(&["solve", "--q", "constant:1", "--f", "zero"], dir.path());
    assert_eq!(code(&o), 0);
    let rep = read_json(&dir.path().join("solve.json"));
    for key in ["y_lp", "f_lp", "w_norm", "s_norm"] {
        assert_eq!(rep["runs"][0]["green"]["norms"][key], 0.0);
    }

    assert_eq!(code(&sturm(&["solve", "--q", "constant:0", "--f", "gaussian:0,1"], dir.path())), 2);
    let forced = sturm(&["solve", "--q", "constant:0", "--f", "gaussian:0,1", "--force"], dir.path());
    assert_ne!(code(&forced), 2);

    let coarse = sturm(
        &["solve", "--q", "example18:1.5,1", "--f", "bump:3,0.05", "--n", "200", "--deviation-tol", "1e-9"],
        dir.path(),
    );
    assert_eq!(code(&coarse), 4);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sturm(&["verify", "--q", "constant:1", "--p", "2", "--domain", "-5:5"], dir.path());
    assert_eq!(code(&o), 0);
    let rep = read_json(&dir.path().join("verify.json"));
    assert_eq!(rep["checks"].as_array().unwrap().len(), 21);
    assert_eq!(code(&sturm(&["verify", "--q", "example17:1", "--p", "2"], dir.path())), 0);
    assert_eq!(code(&sturm(&["verify", "--q", "constant:0"], dir.path())), 2);
}

#[test]
fn reproduce_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = sturm(&["reproduce", "--example", "1.7", "--theta", "0.5,1,2"], dir.path());
    assert_eq!(code(&o), 0);
    let rep = read_json(&dir.path().join("example17.json"));
    let rows = rep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["expected_solvable"], false);
    assert_eq!(rows[0]["d_growth"], true);
    assert_eq!(rows[2]["d_growth"], false);

    let o = sturm(&["reproduce", "--example", "1.8", "--alpha", "1.5", "--beta", "1", "--p", "2"], dir.path());
    assert_eq!(code(&o), 0);
    let rep = read_json(&dir.path().join("example18.json"));
    assert_eq!(rep["profile"]["verdict"], "correctly_solvable");
    assert!(dir.path().join("example18.csv").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"q": "constant:4", "domain": [-3, 3], "n": 61, "a": [0.5]}"#).unwrap();
    let cfg_arg = cfg.to_str().unwrap();

    assert_eq!(code(&sturm(&["--config", cfg_arg, "analyze"], dir.path())), 0);
    let rep = read_json(&dir.path().join("profile.json"));
    assert!(close(&rep["d0_estimate"], 0.5));
    assert!(close(&rep["m_table"][0]["m"], 4.0));
    assert_eq!(rep["x_grid"].as_array().unwrap().len(), 61);

    assert_eq!(code(&sturm(&["--config", cfg_arg, "analyze", "--q", "constant:0.25"], dir.path())), 0);
    let rep = read_json(&dir.path().join("profile.json"));
    assert!(close(&rep["d0_estimate"], 2.0));

    fs::write(&cfg, r#"{"q": {"kind": "constant", "q0": 1.0}, "bogus": 1}"#).unwrap();
    assert_eq!(code(&sturm(&["--config", cfg_arg, "analyze"], dir.path())), 64);
}

#[test]
fn worker_override_does_not_change_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["analyze", "--q", "example17:1.5", "--domain", "-20:20", "--n", "401"];
    let one = Command::new(env!("CARGO_BIN_EXE_sturm"))
        .env("STURM_WORKERS", "1")
        .args(args)
        .arg("--out")
        .arg(a.path())
        .status()
        .unwrap();
    assert!(one.success());
    assert!(sturm(&args, b.path()).status.success());
    assert_eq!(fs::read(a.path().join("profile.json")).unwrap(), fs::read(b.path().join("profile.json")).unwrap());
}
