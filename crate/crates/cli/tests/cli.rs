use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn limbsys(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limbsys"))
        .current_dir(dir)
        .env_remove("LIMBSYS_ARITHMETIC")
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr carries one JSON error")
}

fn fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, text: &str| fs::write(dir.path().join(name), text).unwrap();
    write("mu.json", r#"{"format":"limbsys/1","kind":"measure","weights":["1/4","1/4","1/2"]}"#);
    write("nu.json", r#"{"format":"limbsys/1","kind":"measure","weights":["1/3","1/3","1/3"]}"#);
    write("cost.json", r#"{"format":"limbsys/1","kind":"cost","entries":[[0,1,4],[1,0,1],[4,1,0]]}"#);
    write("heavy.json", r#"{"weights":["1/3","1/3","1/2"]}"#);
    write(
        "cyclic.json",
        r#"{"rows":2,"cols":2,"entries":[[0,0,"1/4"],[0,1,"1/4"],[1,0,"1/4"],[1,1,"1/4"]]}"#,
    );
    dir
}

#[test]
fn solve_pipeline_round_trips() {
    let dir = fixture();
    let d = dir.path();
    let out = limbsys(d, &["solve", "--mu", "mu.json", "--nu", "nu.json", "--cost", "cost.json", "--out", "sol.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = json(&d.join("sol.json"));
    assert_eq!(sol["format"], "limbsys/1");
    assert_eq!(sol["arithmetic"], "exact");
    assert_eq!(sol["primal_value"], sol["dual_value"]);
    assert_eq!(sol["r"][0], "0");

    let out = limbsys(d, &["analyze-support", "sol.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["is_forest"], true);

    let out = limbsys(d, &["decompose-limbs", "sol.json", "--out", "sys.json"]);
    assert_eq!(out.status.code(), Some(0));
    let out = limbsys(d, &["reconstruct", "--system", "sys.json", "--mu", "mu.json", "--nu", "nu.json", "--out", "rec.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&d.join("rec.json"))["entries"], sol["coupling"]["entries"]);

    let out = limbsys(d, &["decompose-limbs", "sol.json", "--root-side", "x-shifted", "--out", "sys2.json"]);
    assert_eq!(out.status.code(), Some(0));
    let sys2 = json(&d.join("sys2.json"));
    assert_eq!(sys2["root_side"], "x-shifted");
    assert_eq!(sys2["limbs"][0]["map"], serde_json::json!({}));
    let out = limbsys(d, &["reconstruct", "--system", "sys2.json", "--mu", "mu.json", "--nu", "nu.json", "--out", "rec2.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&d.join("rec2.json"))["entries"], sol["coupling"]["entries"]);
}

#[test]
fn mass_mismatch_is_a_domain_error() {
    let dir = fixture();
    let out = limbsys(dir.path(), &["solve", "--mu", "mu.json", "--nu", "heavy.json", "--cost", "cost.json", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["code"], "MassMismatch");
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = fixture();
    let d = dir.path();
    let out = limbsys(d, &["solve", "--mu", "mu.json", "--nu", "nu.json", "--cost", "cost.json", "--exact", "--tol", "1e-6", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["code"], "Usage");
    let out = limbsys(d, &["solve", "--mu", "mu.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--nu"));
    let out = limbsys(d, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = limbsys(d, &["selftest", "42"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_reported() {
    let dir = fixture();
    let out = limbsys(dir.path(), &["analyze-support", "nope.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["code"], "Io");
}

#[test]
fn environment_selects_float() {
    let dir = fixture();
    let out = Command::new(env!("CARGO_BIN_EXE_limbsys"))
        .current_dir(dir.path())
        .env("LIMBSYS_ARITHMETIC", "float")
        .args(["solve", "--mu", "mu.json", "--nu", "nu.json", "--cost", "cost.json", "--tol", "1e-9", "--out", "f.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = json(&dir.path().join("f.json"));
    assert_eq!(sol["arithmetic"], "float");
    assert!(sol["primal_value"].is_number());
}

#[test]
fn cyclic_support_is_not_extremal() {
    let dir = fixture();
    let d = dir.path();
    let out = limbsys(d, &["check-extremal", "cyclic.json", "--out", "v.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&d.join("v.json"));
    assert_eq!(v["extremal"], false);
    assert_eq!(v["agree"], true);
    for verdict in v["verdicts"].as_array().unwrap() {
        assert!(verdict["witness"].is_object());
    }
    let out = limbsys(d, &["decompose-limbs", "cyclic.json", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["code"], "NotAForest");
    let out = limbsys(d, &["check-extremal", "cyclic.json", "--methods", "forest,magic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subtwist_check_on_the_circle() {
    let dir = fixture();
    let out = limbsys(dir.path(), &["subtwist-check", "--manifold", "circle", "--n", "64", "--cost", "circle_cos"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classification"], "subtwisted");
    assert_eq!(v["pairs"], 64 * 63);
    assert_eq!(v["pairs_with_one_min_one_max"], 64 * 63);
    let out = limbsys(dir.path(), &["subtwist-check", "--manifold", "circle", "--n", "3", "--cost", "circle_cos"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn circle_demo_writes_identical_artifacts() {
    let dir = fixture();
    let d = dir.path();
    for run in ["a", "b"] {
        let out = limbsys(d, &["circle-demo", "--n", "128", "--kappa", "4", "--out", run]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["support.csv", "potentials.csv", "limbs.json", "support.svg"] {
        let a = fs::read(d.join("a").join(name)).unwrap();
        let b = fs::read(d.join("b").join(name)).unwrap();
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between runs");
    }
    let limbs = json(&d.join("a/limbs.json"));
    assert_eq!(limbs["summary"]["certificate"], true);
    let csv = fs::read_to_string(d.join("a/support.csv")).unwrap();
    assert!(csv.starts_with("i,j,theta,phi,mass,limb\n"));
}

#[test]
fn solve_output_is_deterministic() {
    let dir = fixture();
    let d = dir.path();
    for name in ["s1.json", "s2.json"] {
        let out = limbsys(d, &["solve", "--mu", "mu.json", "--nu", "nu.json", "--cost", "cost.json", "--out", name]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(d.join("s1.json")).unwrap(), fs::read(d.join("s2.json")).unwrap());
}

#[test]
fn selftest_runs_a_single_criterion() {
    let dir = fixture();
    let out = limbsys(dir.path(), &["selftest", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("criterion 1 PASS"));
}
