use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use npick::datasets::{serialize_dataset, Dataset};
use npick::fixtures;
use npick::numkit::re;

struct Run {
    code: i32,
    stdout: String,
    report: Value,
}

fn npick(args: &[&str]) -> Run {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_npick")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    Run {
        code: out.status.code().unwrap(),
        stdout,
        report,
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn fixture_files(dir: &TempDir) -> [PathBuf; 5] {
    let file = |name: &str, d| write(dir, name, &serialize_dataset(&Dataset::Btoa(d)));
    [
        write(dir, "d1.json", &serialize_dataset(&Dataset::Simple(fixtures::d1_simple()))),
        file("d2.json", fixtures::d2()),
        file("d3.json", fixtures::d3()),
        file("d4.json", fixtures::d4(re(0.1))),
        file("d4_rho1.json", fixtures::d4(re(1.0))),
    ]
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scalar(v: &Value) -> (f64, f64) {
    (v[0][0][0].as_f64().unwrap(), v[0][0][1].as_f64().unwrap())
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let [d1, ..] = fixture_files(&dir);
    let r = npick(&["validate", s(&d1)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["verdict"], true);

    let bad = write(
        &dir,
        "neg.json",
        r#"{"kind": "btoa", "Z": [[[-1, 0]]], "X": [[[1, 0]]], "Y": [[[0, 0]]], "W": [], "U": [], "V": [], "Gamma": []}"#,
    );
    let r = npick(&["validate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["spectra_ok"], false);

    let broken = write(&dir, "broken.json", "{\"kind\": ");
    assert_eq!(npick(&["validate", s(&broken)]).code, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(npick(&["validate", s(&missing)]).code, 2);
}

#[test]
fn pick_verdicts() {
    let dir = TempDir::new().unwrap();
    let [d1, _, d3, _, d4_rho1] = fixture_files(&dir);
    let r = npick(&["pick", s(&d1)]);
    assert_eq!((r.code, r.report["kappa"].as_u64()), (0, Some(0)));
    assert_eq!(r.report["verdict"], "solvable");
    let r = npick(&["pick", s(&d3)]);
    assert_eq!((r.code, r.report["kappa"].as_u64()), (1, Some(1)));
    let r = npick(&["pick", s(&d4_rho1)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["verdict"], "indefinite");
}

#[test]
fn solve_values() {
    let dir = TempDir::new().unwrap();
    let [d1, d2, d3, ..] = fixture_files(&dir);
    let r = npick(&["solve", s(&d1), "--g-zero", "--eval", "5"]);
    assert_eq!(r.code, 0);
    let (a, b) = scalar(&r.report["evaluations"][0]["value"]);
    assert!(a.abs() < 1e-12 && b.abs() < 1e-12);

    let r = npick(&["solve", s(&d3), "--g-zero", "--eval", "1"]);
    assert_eq!(r.code, 0);
    let (a, b) = scalar(&r.report["evaluations"][0]["value"]);
    assert!((a - 2.0).abs() < 1e-10 && b.abs() < 1e-10);

    let g = write(&dir, "half.json", r#"{"kind": "constant", "value": [[[0.5, 0]]]}"#);
    let r = npick(&["solve", s(&d2), "--g-file", s(&g), "--eval", "3"]);
    assert_eq!(r.code, 0);
    let (a, b) = scalar(&r.report["evaluations"][0]["value"]);
    assert!((a - 0.25).abs() < 1e-10 && b.abs() < 1e-10);

    // A non-contractive constant is rejected as input.
    let big = write(&dir, "big.json", r#"{"kind": "constant", "value": [[[1.5, 0]]]}"#);
    assert_eq!(npick(&["solve", s(&d2), "--g-file", s(&big)]).code, 2);
}

#[test]
fn verify_modes() {
    let dir = TempDir::new().unwrap();
    let [d1, _, d3, ..] = fixture_files(&dir);
    let r = npick(&["verify", s(&d1), "--s-from-solve", "--g-zero"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["pass"], true);

    let one = write(&dir, "one.json", r#"{"kind": "constant", "value": [[[1, 0]]]}"#);
    let r = npick(&["verify", s(&d1), "--s-file", s(&one)]);
    assert_eq!(r.code, 1);
    let r_left = r.report["residuals"]["r_left"].as_f64().unwrap();
    assert!((r_left - 1.0).abs() < 1e-10);

    let r = npick(&["verify", s(&d3), "--s-from-solve", "--g-zero", "--kappa", "1"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["mode"], "generalized");
    // The same function is not a Schur-class solution.
    assert_eq!(npick(&["verify", s(&d3), "--s-from-solve", "--g-zero"]).code, 1);

    // S = -4/(3λ - 5) written as a realization.
    let s3 = write(
        &dir,
        "s3.json",
        r#"{"kind": "realization", "A": [[[1.6666666666666667, 0]]], "B": [[[1, 0]]], "C": [[[-1.3333333333333333, 0]]], "D": [[[0, 0]]]}"#,
    );
    let r = npick(&["verify", s(&d3), "--s-file", s(&s3), "--kappa", "1", "--nodes", "128"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
}

#[test]
fn kappa_certificates() {
    let dir = TempDir::new().unwrap();
    let [d1, _, d3, ..] = fixture_files(&dir);
    let r = npick(&["kappa", s(&d3), "--g-zero"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["certified"], true);
    assert_eq!(r.report["kappa_pick"], 1);
    let r = npick(&["kappa", s(&d1)]);
    assert_eq!((r.code, r.report["kappa_pick"].as_u64()), (0, Some(0)));

    let g = write(&dir, "half.json", r#"{"kind": "constant", "value": [[[0.5, 0]]]}"#);
    let r = npick(&["kappa", s(&d3), "--g-file", s(&g)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["side_condition_ok"], false);
}

#[test]
fn output_is_deterministic_and_mirrored() {
    let dir = TempDir::new().unwrap();
    let [_, d2, ..] = fixture_files(&dir);
    let out = dir.path().join("report.json");
    let args = ["solve", s(&d2), "--g-random", "--seed", "7", "--eval", "1+2i", "--json"];
    let a = npick(&args);
    let b = npick(&[&args[..], &["--out", s(&out)]].concat());
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a.stdout);
    let c = npick(&["demo", "--seed", "3"]);
    assert_eq!(c.code, 0);
    assert_eq!(c.stdout, npick(&["demo", "--seed", "3"]).stdout);
}

#[test]
fn solve_then_verify_on_definite_fixtures() {
    let dir = TempDir::new().unwrap();
    let [d1, d2, _, d4, _] = fixture_files(&dir);
    let mut rng = fixtures::seeded_rng(12);
    let random: Vec<PathBuf> = (0..3)
        .map(|k| {
            let d = fixtures::random_with_kappa(&mut rng, 0, k % 2 == 0);
            write(&dir, &format!("random{k}.json"), &serialize_dataset(&d))
        })
        .collect();
    for path in [d1, d2, d4].iter().chain(random.iter()) {
        let r = npick(&["verify", s(path), "--s-from-solve", "--g-zero"]);
        assert_eq!(r.code, 0, "{}", r.stdout);
        for seed in ["1", "2"] {
            let r = npick(&["verify", s(path), "--s-from-solve", "--g-random", "--seed", seed]);
            assert_eq!(r.code, 0, "{}", r.stdout);
        }
    }
}

#[test]
fn usage_errors_are_input_errors() {
    let r = npick(&["solve"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["kind"], "input");
    let dir = TempDir::new().unwrap();
    let [d1, ..] = fixture_files(&dir);
    assert_eq!(npick(&["solve", s(&d1), "--g-zero", "--g-random"]).code, 2);
}
