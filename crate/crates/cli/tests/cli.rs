use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eigenstaf-cli-{}-{}", std::process::id(), name));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenstaf"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn run_bundled(name: &str) -> (Value, PathBuf) {
    let out = scratch(name);
    let o = run(&configs().join(format!("{name}.json")), &out, &[]);
    assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    (serde_json::from_str(&report).unwrap(), out)
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn spectrum_reports_the_golden_polynomial() {
    let (r, out) = run_bundled("spectrum_golden");
    assert_eq!(r["char_poly"], "x^2 - x - 1");
    assert!((r["lambda"].as_f64().unwrap() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert_eq!(csv_rows(&out.join("spectrum.csv")), 2);
}

#[test]
fn pf_cumulative_function_is_the_identity() {
    let (r, out) = run_bundled("cdf_golden_pf");
    assert!(r["max_identity_deviation"].as_f64().unwrap() < 1e-8);
    assert!((r["holder_exponent"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(csv_rows(&out.join("cdf.csv")), 1001);
}

#[test]
fn split_spectrum_commands_run() {
    let (r, _) = run_bundled("staf_split5");
    assert_eq!(r["atomless"], true);
    let (r, out) = run_bundled("variation_split5");
    assert_eq!(r["verdict"]["bounded"], false);
    let want = r["expected_rate"].as_f64().unwrap();
    assert!((r["verdict"]["rate"].as_f64().unwrap() - want).abs() < 0.05 * want);
    assert_eq!(csv_rows(&out.join("variation.csv")), 25);
    let (r, _) = run_bundled("cdf_split5");
    assert!(r["max_identity_deviation"].is_null());
    assert!(r["holder_exponent"].as_f64().unwrap() < 1.0);
}

#[test]
fn central_pairings_pass_the_eigen_check() {
    let (r, out) = run_bundled("pair_central3");
    assert_eq!(r["eigen_check"]["failures"], 0);
    assert_eq!(csv_rows(&out.join("pairing.csv")), 20);
}

#[test]
fn cocycle_solution_satisfies_the_equation() {
    let (r, out) = run_bundled("cocycle_cat");
    assert!(r["residual"].as_f64().unwrap() < 1e-9);
    assert!(r["series_distance"].as_f64().unwrap() < 1e-9);
    assert!(r["equivariance_defect"].as_f64().unwrap() < 1e-12);
    assert!(csv_rows(&out.join("cocycle_trace.csv")) > 1);
}

#[test]
fn regularity_matches_the_exponent() {
    let (r, out) = run_bundled("regularity_split5");
    let nu = r["nu"].as_f64().unwrap();
    assert!((r["holder"]["nu_hat"].as_f64().unwrap() - nu).abs() < 0.05);
    assert!(r["steepness"]["fraction_positive"].as_f64().unwrap() >= 0.95);
    let v = &r["variation"];
    assert!(v["fitted_rate"].as_f64().unwrap() >= v["required"].as_f64().unwrap());
    for t in ["regularity_scales.csv", "regularity_steepness.csv", "regularity_variation.csv"] {
        assert!(out.join(t).exists(), "{t}");
    }
}

#[test]
fn verify_on_golden_passes() {
    let (r, out) = run_bundled("verify_golden");
    assert_eq!(r["all_passed"], true);
    assert_eq!(csv_rows(&out.join("verify.csv")), 10);
}

#[test]
fn reports_are_deterministic() {
    let config = configs().join("pair_central3.json");
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    assert!(run(&config, &a, &[]).status.success());
    assert!(run(&config, &b, &[]).status.success());
    for f in ["report.json", "pairing.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_the_config() {
    let out = scratch("override");
    let o = run(&configs().join("staf_split5.json"), &out, &["--depth", "6"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["requested_depth"], 6);
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = scratch(name);
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn config_errors_exit_with_two() {
    let cases = [
        ("unknown", r#"{"command": "spectrum", "bundle": "golden", "colour": 1}"#, "colour"),
        ("missing-staf", r#"{"command": "staf", "bundle": "golden"}"#, "staf"),
        ("bad-tol", r#"{"command": "spectrum", "bundle": "golden", "tol": -1}"#, "tol"),
        ("two-sources", r#"{"command": "spectrum", "bundle": "golden", "matrix": {"dim": 1, "rows": [[1]]}}"#, "matrix"),
        ("bad-bundle", r#"{"command": "spectrum", "bundle": "silver"}"#, "bundle"),
    ];
    for (name, body, field) in cases {
        let path = write_config(name, body);
        let o = run(&path, &path.with_file_name("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(field), "{name}");
    }
}

#[test]
fn numeric_errors_exit_with_three() {
    let body = r#"{"command": "spectrum", "matrix": {"dim": 2, "rows": [[1, 0], [0, 1]]}}"#;
    let path = write_config("reducible", body);
    let o = run(&path, &path.with_file_name("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
}
