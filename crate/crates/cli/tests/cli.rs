use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ring-photon"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn intensity_csv_has_metadata_and_peaks() {
    let csv = run_ok(&["intensity", "--n-sites", "15", "--spacing", "1.0", "--theta-l", "pi/4", "--phi-l", "pi", "--grid", "64x64"]);
    assert!(csv.starts_with("# command: \"intensity\"\n# units: \"lengths in λ_L, rates in Γ\"\n"));
    assert!(csv.contains("\ntheta,phi,value\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 64 * 64);
    let peaks_line = csv.lines().find(|l| l.starts_with("# peaks: ")).unwrap();
    let peaks: Value = serde_json::from_str(&peaks_line["# peaks: ".len()..]).unwrap();
    let mut thetas: Vec<f64> = peaks.as_array().unwrap()[..2].iter().map(|p| p["theta"].as_f64().unwrap()).collect();
    thetas.sort_by(f64::total_cmp);
    let pi = std::f64::consts::PI;
    assert!((thetas[0] - pi / 4.0).abs() < 0.1 && (thetas[1] - 3.0 * pi / 4.0).abs() < 0.1, "{thetas:?}");
}

#[test]
fn json_output_to_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        run_ok(&["g2-map", "--n-sites", "10", "--spacing", "0.5", "--p", "2", "--grid", "16", "--format", "json", "--out", path.to_str().unwrap()]);
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["metadata"]["command"], "g2-map");
    assert!(v["metadata"]["theta_ref"].is_number());
    assert_eq!(v["nodes"].as_array().unwrap().len(), 256);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"overlaps\"\nn-sites = 40\np = \"1,5,10\"\nformat = \"json\"\n").unwrap();
    let out = run_ok(&["--config", cfg.to_str().unwrap(), "--p", "1"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["metadata"]["p"], serde_json::json!([1]));
    assert_eq!(v["nodes"].as_array().unwrap().len(), 21);
}

#[test]
fn invalid_input_gives_single_line_error() {
    for args in [
        vec!["intensity", "--n-sites", "0", "--spacing", "1"],
        vec!["intensity", "--n-sites", "10", "--spacing", "11"],
        vec!["intensity", "--n-sites", "10"],
        vec!["teleport", "--n-sites", "10", "--spacing", "1"],
        vec!["intensity", "--n-sites", "10", "--spacing", "1", "--theta-l", "north"],
        vec!["g2-map", "--n-sites", "10", "--spacing", "1", "--p", "9"],
        vec!["intensity", "--config", "/nonexistent/run.toml"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn golden_check_passes_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.csv");
    let base = ["pair-intensity", "--n-sites", "15", "--spacing", "0.5", "--theta-l", "pi/4", "--phi-l", "pi", "--p", "1"];
    let mut args = base.to_vec();
    args.extend(["--grid", "32", "--out", reference.to_str().unwrap()]);
    run_ok(&args);

    let mut finer = base.to_vec();
    finer.extend(["--grid", "64", "--check-against", reference.to_str().unwrap(), "--tolerance", "0.02", "--out", "/dev/null"]);
    let out = bin().args(&finer).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS"));

    let mut other = vec!["pair-intensity", "--n-sites", "15", "--spacing", "0.6", "--theta-l", "pi/4", "--phi-l", "pi", "--p", "1"];
    other.extend(["--grid", "32", "--check-against", reference.to_str().unwrap(), "--tolerance", "0.005", "--out", "/dev/null"]);
    let out = bin().args(&other).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.starts_with("FAIL"));
    assert!(report.lines().count() > 1, "worst nodes listed");
}

#[test]
fn modes_and_perpendicular_profile() {
    let modes = run_ok(&["modes", "--n-sites", "10", "--spacing", "0.1"]);
    assert!(modes.contains("\nk,rate,shift\n"));
    let perp = run_ok(&["intensity-perp", "--n-sites", "20", "--spacing", "0.43", "--grid", "96x8", "--format", "json"]);
    let v: Value = serde_json::from_str(&perp).unwrap();
    let maxima: Vec<f64> = v["metadata"]["polar_maxima"].as_array().unwrap().iter().map(|m| m["theta"].as_f64().unwrap()).collect();
    assert!(maxima.iter().any(|t| (t - 1.0).abs() < 0.1) && maxima.iter().any(|t| (t - 0.5).abs() < 0.1), "{maxima:?}");
}
