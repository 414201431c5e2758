use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn torusct(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torusct")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = torusct(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn directions_of_radius_one() {
    let dir = TempDir::new().unwrap();
    let rows = ok(dir.path(), &["directions", "--r", "1"]);
    assert_eq!(rows.lines().count(), 5);
    assert_eq!(ok(dir.path(), &["directions", "--r", "50", "--count"]).trim(), "3096");
}

#[test]
fn bound_at_balanced_parameters() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), &["bound", "--alpha", "0.25", "--s", "0.5", "--delta", "0.5", "--eps", "0", "--fnorm", "1"]);
    let v: f64 = out.trim().parse().unwrap();
    assert!((v - 0.25).abs() < 1e-12, "{v}");
}

#[test]
fn bound_names_the_violated_inequality() {
    let dir = TempDir::new().unwrap();
    let out = torusct(dir.path(), &["bound", "--alpha", "0.5", "--s", "0.5", "--delta", "1.5", "--eps", "0", "--fnorm", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta < 2s"));
}

#[test]
fn flag_phantom_has_three_levels() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["phantom", "--name", "flag", "--n", "64", "--out", "flag.csv"]);
    let text = std::fs::read_to_string(dir.path().join("flag.csv")).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        let value: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        *counts.entry((value * 10.0).round() as i64).or_insert(0usize) += 1;
    }
    assert_eq!(counts.keys().copied().collect::<Vec<_>>(), [0, 3, 9], "{counts:?}");
    assert_eq!(counts.values().sum::<usize>(), 64 * 64);
}

#[test]
fn forward_writes_one_row_per_sample() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["phantom", "--name", "gaussian", "--n", "32", "--out", "g.pgm"]);
    ok(dir.path(), &["forward", "--model", "A1", "--input", "g.pgm", "--r", "3", "--n-d", "16", "--out", "d.csv"]);
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 16);
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec!["forward", "--model", "A2", "--name", "flag", "--r", "2", "--sigma", "0.02", "--seed", "7", "--out", out]
    };
    ok(dir.path(), &args("a.csv"));
    ok(dir.path(), &args("b.csv"));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_alpha_leaves_the_table_unchanged() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["forward", "--model", "A2", "--name", "gaussian", "--r", "3", "--out", "d.csv"]);
    ok(dir.path(), &["reconstruct", "--input", "d.csv", "--r", "3", "--out", "plain.csv"]);
    ok(dir.path(), &["reconstruct", "--input", "d.csv", "--r", "3", "--alpha", "0", "--s", "1", "--out", "zero.csv"]);
    let a = std::fs::read(dir.path().join("plain.csv")).unwrap();
    let b = std::fs::read(dir.path().join("zero.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reconstruction_of_a_smooth_phantom_is_accurate() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["forward", "--model", "A2", "--name", "gaussian", "--r", "8", "--out", "d.csv"]);
    ok(dir.path(), &["reconstruct", "--input", "d.csv", "--r", "8", "--out", "t.csv"]);
    let report = ok(dir.path(), &["metrics", "--table", "t.csv", "--name", "gaussian", "--n-eval", "64"]);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(json["value"].as_f64().unwrap() < 1e-3, "{json}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"r": 50, "count": true}"#).unwrap();
    assert_eq!(ok(dir.path(), &["directions", "--config", "c.json"]).trim(), "3096");
    assert_eq!(ok(dir.path(), &["directions", "--config", "c.json", "--r", "1"]).trim(), "4");
    std::fs::write(dir.path().join("bad.json"), r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&torusct(dir.path(), &["directions", "--config", "bad.json"])), 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&torusct(dir.path(), &["--help"])), 0);
    assert_eq!(code(&torusct(dir.path(), &["bogus"])), 1);
    let at2 = torusct(dir.path(), &["forward", "--model", "AT2", "--r", "2", "--out", "x.csv"]);
    assert_eq!(code(&at2), 1);
    assert!(String::from_utf8_lossy(&at2.stderr).contains("missing required field --sinogram"));
    let missing = torusct(dir.path(), &["reconstruct", "--input", "nope.csv", "--r", "2", "--out", "t.csv"]);
    assert_eq!(code(&missing), 2);
    assert_eq!(code(&torusct(dir.path(), &["directions", "--config", "nope.json", "--r", "1"])), 2);
}
