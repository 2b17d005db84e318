use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polybern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybern"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn pmf_forms() {
    assert_eq!(stdout(&polybern(&["pmf", "1/5", "3/10", "1/2", "--exact"])), "7/25 47/100 11/50 3/100\n");
    assert_eq!(stdout(&polybern(&["pmf", "0.2", "0.3", "0.5"])), "7/25 47/100 11/50 3/100\n");
    assert_eq!(stdout(&polybern(&["pmf", "--exact"])), "1\n");
    assert_eq!(stdout(&polybern(&["pmf", "0.5", "--float"])), "0.5 0.5\n");
}

#[test]
fn malformed_literals_are_usage_errors() {
    for bad in ["1/0", "0.1234567890123", "abc", "3/2", "1e-3"] {
        let o = polybern(&["pmf", bad]);
        assert_eq!(code(&o), 2, "{bad}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn derivative_examples() {
    let v = json(&polybern(&["derivative", "1/2", "1/2", "--family", "shannon", "--method", "mixing"]));
    assert!(v["first"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["bound_check"], Value::Bool(true));

    let v = json(&polybern(&["derivative", "1/4", "1/2", "--family", "shannon", "--method", "direct"]));
    assert!((v["first"].as_f64().unwrap() - 0.130812).abs() < 1e-6);
    assert!(v["second"].as_f64().unwrap() < 0.0);

    let fd = json(&polybern(&["derivative", "1/4", "1/2", "--method", "fd"]));
    assert!((fd["first"].as_f64().unwrap() - 0.130812).abs() < 1e-6);
    assert_eq!(fd["method"], "finite_difference");

    let v = json(&polybern(&["derivative", "0.49", "0.5", "--family", "tsallis", "--q", "3", "--method", "direct"]));
    assert!(v["first"].as_f64().unwrap() < 0.0);

    let v = json(&polybern(&["derivative", "1/4", "1/3", "--family", "renyi", "--q", "2"]));
    assert_eq!(v["schema"], 1);
}

#[test]
fn derivative_errors() {
    assert_eq!(code(&polybern(&["derivative", "1/4", "1/2", "--family", "tsallis", "--q", "1"])), 2);
    assert_eq!(code(&polybern(&["derivative", "1/4", "1", "--method", "fd"])), 2);
    assert_eq!(code(&polybern(&["derivative", "1/4", "1/3", "--method", "mixing"])), 2);
    assert_eq!(code(&polybern(&["derivative", "1/4", "1/2", "--method", "bogus"])), 2);
}

#[test]
fn entropy_and_mixing() {
    let v = json(&polybern(&["entropy", "1/2", "1/2"]));
    assert!((v["entropy"].as_f64().unwrap() - 1.039721).abs() < 1e-6);
    let v = json(&polybern(&["entropy", "1/2", "1/2", "--family", "renyi", "--q", "0"]));
    assert!((v["entropy"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-15);

    let v = json(&polybern(&["mixing", "1/4", "--rmax", "2"]));
    assert_eq!(v["alphas"], serde_json::json!(["0", "3/4", "1"]));
    assert_eq!(v["spacings"], serde_json::json!(["3/4", "1/4"]));
    assert_eq!(v["chains"][0]["moment"], "-3/128");
    assert_eq!(v["chains"][0]["chain_monotone"], true);
}

#[test]
fn verify_examples() {
    let o = polybern(&["verify", "1/4", "1/2", "--suite", "all", "--rmax", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["schema"], 1);

    let o = polybern(&["verify", "1/2", "1/2", "--suite", "monotonicity"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["info"]["equality_attained"], true);

    let o = polybern(&["verify", "3/4", "1/2", "--suite", "monotonicity"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["info"]["skipped"], true);
    assert_eq!(v["checks"][0]["status"], "skipped");

    for suite in ["spacing", "appendix", "identities"] {
        assert_eq!(code(&polybern(&["verify", "1/5", "3/10", "1/2", "--suite", suite])), 0, "{suite}");
    }
}

#[test]
fn verify_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = polybern(&["verify", "1/4", "1/2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["suite"], "all");

    let missing = dir.path().join("no/such/dir/report.json");
    assert_eq!(code(&polybern(&["verify", "1/4", "1/2", "--out", missing.to_str().unwrap()])), 2);
}

fn sweep_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec!["sweep", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = polybern(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn sweep_grid_has_five_passing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(sweep_to(
        dir.path(),
        "grid.csv",
        &["--mode", "grid", "--n", "2", "--lo", "0.1", "--hi", "0.5", "--step", "0.1"],
    ))
    .unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    for flag in ["moments_pass", "chain_pass", "derivative_pass"] {
        let i = headers.iter().position(|h| h == flag).unwrap();
        assert!(rows.iter().all(|r| &r[i] == "true"));
    }
    assert!(text.contains("\"1/10 1/2\""));
}

#[test]
fn sweep_is_byte_identical_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--mode", "random", "--samples", "1000", "--seed", "7", "--n", "6"];
    let a = sweep_to(dir.path(), "a.csv", &args);
    let b = sweep_to(dir.path(), "b.csv", &args);
    assert_eq!(a, b);

    let path = dir.path().join("c.csv");
    let mut full = vec!["sweep", "--out", path.to_str().unwrap()];
    full.extend_from_slice(&args);
    let o = Command::new(env!("CARGO_BIN_EXE_polybern"))
        .args(&full)
        .env("POLYBERN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(path).unwrap(), a);

    let o = Command::new(env!("CARGO_BIN_EXE_polybern"))
        .args(["sweep"])
        .env("POLYBERN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn tsallis_sweep_columns_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(sweep_to(
        dir.path(),
        "t.json",
        &["--mode", "random", "--samples", "200", "--seed", "3", "--n", "7", "--q", "0.5,1.0,1.5,2.0", "--format", "json"],
    ))
    .unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    for row in v["rows"].as_array().unwrap() {
        for col in row["tsallis"].as_array().unwrap() {
            assert!(col["derivative"].as_f64().unwrap() >= -1e-12);
        }
    }
}

#[test]
fn sweep_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.json");
    std::fs::write(&spec, r#"{"mode": "grid", "n": 3, "lo": "1/4", "hi": "1/2", "step": "1/4", "r_max": 2}"#).unwrap();
    let text = String::from_utf8(sweep_to(dir.path(), "s.csv", &["--spec", spec.to_str().unwrap()])).unwrap();
    assert_eq!(text.lines().count(), 5);

    std::fs::write(&spec, r#"{"mode": "grid", "bogus": 1}"#).unwrap();
    assert_eq!(code(&polybern(&["sweep", "--spec", spec.to_str().unwrap()])), 2);
}

#[test]
fn counterexample_table() {
    let v = json(&polybern(&["counterexample", "--q", "3", "--eps", "0.01"]));
    let rows = v["rows"].as_array().unwrap();
    assert!((rows[0]["exact"].as_f64().unwrap() + 0.00187425).abs() < 1e-9);
    for r in &rows[1..] {
        assert!((r["gap_ratio"].as_f64().unwrap() - 8.0).abs() < 0.1);
    }
    assert_eq!(code(&polybern(&["counterexample", "--q", "0.5"])), 2);
}

#[test]
fn search_is_reproducible() {
    let args = ["search", "--samples", "100", "--seed", "5", "--n-max", "8"];
    let a = polybern(&args);
    let b = polybern(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["info"]["negative_derivatives"], 0);
    assert_eq!(code(&polybern(&["search", "--q-max", "2.5"])), 2);
}
