use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn slspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slspec"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn zero_sigma(dir: &Path) {
    write(dir, "zero.json", r#"{"breakpoints":[0,1],"values":[0]}"#);
}

#[test]
fn forward_zero_potential() {
    let tmp = TempDir::new().unwrap();
    zero_sigma(tmp.path());
    let out = slspec(tmp.path(), &["forward", "--sigma", "zero.json", "--H", "inf", "--h", "0", "--n", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sp = read_json(tmp.path(), "spectrum.json");
    assert_eq!(sp["regime"], "HalfIntegerCos");
    for (i, s) in floats(&sp["eigenvalues"]).into_iter().enumerate() {
        let exact = (PI * (i as f64 + 0.5)).powi(2);
        assert!((s - exact).abs() <= 1e-10 * exact);
    }
    let data = read_json(tmp.path(), "spectral_data.json");
    assert_eq!(data["H"], "inf");
    assert!(floats(&data["alphas"]).iter().all(|a| (a - 1.0).abs() < 1e-10));
}

#[test]
fn dirichlet_right_end_skips_norming_constants() {
    let tmp = TempDir::new().unwrap();
    zero_sigma(tmp.path());
    let out = slspec(tmp.path(), &["forward", "--sigma", "zero.json", "--h", "inf", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("spectrum.json").exists());
    assert!(!tmp.path().join("spectral_data.json").exists());
}

#[test]
fn validate_zero_pair_accepts() {
    let tmp = TempDir::new().unwrap();
    zero_sigma(tmp.path());
    let out = slspec(tmp.path(), &["forward", "--sigma", "zero.json", "--h", "0", "--h2", "inf", "--n", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let out = slspec(tmp.path(), &["validate", "--pair", "two_spectra.json", "--regime", "third-dirichlet"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(read_json(tmp.path(), "validation_report.json")["verdict"], "Accept");
}

#[test]
fn rejected_pair_exits_two_without_spectral_data() {
    let tmp = TempDir::new().unwrap();
    let lam: Vec<f64> = (1..=40).map(|n| (PI * (n as f64 - 0.5)).powi(2)).collect();
    let mu: Vec<f64> = (1..=40).map(|n| (PI * (n as f64 - 0.5) + 0.5).powi(2)).collect();
    let pair = serde_json::json!({"regime": "ThirdThird", "lambda_sq": lam, "mu_sq": mu});
    write(tmp.path(), "pair.json", &pair.to_string());
    let out = slspec(tmp.path(), &["reduce", "--pair", "pair.json"]);
    assert_eq!(out.status.code(), Some(2));
    let report = read_json(tmp.path(), "validation_report.json");
    assert_eq!(report["verdict"], "Reject");
    assert!(!tmp.path().join("spectral_data.json").exists());
}

#[test]
fn malformed_json_exits_one_with_position() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.json", "{\"breakpoints\":[0,1],\n\"values\":[0,}");
    let out = slspec(tmp.path(), &["forward", "--sigma", "bad.json", "--h", "0", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("line 2"), "{err}");
    assert!(!tmp.path().join("spectrum.json").exists());
}

#[test]
fn invalid_potential_exits_one() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.json", r#"{"breakpoints":[0,0.5],"values":[1]}"#);
    let out = slspec(tmp.path(), &["forward", "--sigma", "s.json", "--h", "0", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reduce_then_reconstruct_zero_potential() {
    let tmp = TempDir::new().unwrap();
    zero_sigma(tmp.path());
    slspec(tmp.path(), &["forward", "--sigma", "zero.json", "--h", "0", "--h2", "inf", "--n", "40"]);
    let out = slspec(tmp.path(), &["reduce", "--pair", "two_spectra.json", "--out", "reduced.json", "--csv", "plots"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("plots/alphas.csv")).unwrap();
    assert!(csv.starts_with("n,value\n1,"));
    assert_eq!(csv.lines().count(), 41);
    let out = slspec(
        tmp.path(),
        &["reconstruct", "--data", "reduced.json", "--cells", "8", "--reg", "0", "--out", "sigma.json", "--result", "fit.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sigma = read_json(tmp.path(), "sigma.json");
    assert!(floats(&sigma["values"]).iter().all(|v| v.abs() < 1e-3));
    assert_eq!(read_json(tmp.path(), "fit.json")["status"], "Converged");
}

#[test]
fn roundtrip_step_is_within_thresholds_and_reproducible() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "step.json", r#"{"breakpoints":[0,0.5,1],"values":[0,1]}"#);
    let args = [
        "roundtrip", "--sigma", "step.json", "--regime", "third-third", "--h1", "0", "--h2", "2", "--n", "60",
        "--report", "report.json",
    ];
    let out = slspec(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read(tmp.path().join("report.json")).unwrap();
    let report: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["all_within_thresholds"], true);
    assert!(report["sigma_l2_error"].as_f64().unwrap() <= 5e-2);
    slspec(tmp.path(), &args);
    assert_eq!(first, fs::read(tmp.path().join("report.json")).unwrap());
}

#[test]
fn roundtrip_regime_mismatch_is_an_error() {
    let tmp = TempDir::new().unwrap();
    zero_sigma(tmp.path());
    let out = slspec(
        tmp.path(),
        &["roundtrip", "--sigma", "zero.json", "--regime", "third-dirichlet", "--h1", "0", "--h2", "2"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn forward_output_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.json", r#"{"breakpoints":[0,0.3,1],"values":[1.5,-0.25]}"#);
    let args = ["forward", "--sigma", "s.json", "--h", "-0.5", "--n", "30"];
    slspec(tmp.path(), &args);
    let a = fs::read(tmp.path().join("spectral_data.json")).unwrap();
    slspec(tmp.path(), &args);
    assert_eq!(a, fs::read(tmp.path().join("spectral_data.json")).unwrap());
}
