//! Replays the checked-in fuzz corpus through the fuzz-target invariants.

use std::fs;
use std::path::PathBuf;

use ring_photon::config::{parse_angle, parse_grid, parse_p_list, ExperimentConfig, PartialConfig};
use ring_photon::dataset::Dataset;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            (path, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds_are_valid() {
    for (path, text) in seeds("config_toml") {
        let partial = PartialConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        ExperimentConfig::try_from(partial).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn scalar_seeds_parse() {
    for (_, text) in seeds("angle") {
        assert!(parse_angle(&text).unwrap().is_finite(), "{text}");
    }
    for (_, text) in seeds("grid_spec") {
        parse_grid(&text).unwrap();
    }
    for (_, text) in seeds("p_list") {
        assert!(!parse_p_list(&text).unwrap().is_empty());
    }
}

#[test]
fn dataset_seeds_round_trip() {
    for (path, text) in seeds("dataset_csv") {
        let ds = Dataset::parse_csv(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ds.to_csv(), text);
    }
    for (path, text) in seeds("dataset_json") {
        let ds = Dataset::parse_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ds.to_json(), text);
    }
}

#[test]
fn truncated_seeds_never_panic() {
    for target in ["dataset_csv", "dataset_json", "config_toml"] {
        for (_, text) in seeds(target) {
            for cut in (0..text.len()).filter(|&i| text.is_char_boundary(i)).step_by(7) {
                let piece = &text[..cut];
                if let Ok(ds) = Dataset::parse_csv(piece) {
                    assert_eq!(Dataset::parse_csv(&ds.to_csv()).unwrap(), ds);
                }
                if let Ok(ds) = Dataset::parse_json(piece) {
                    assert_eq!(Dataset::parse_json(&ds.to_json()).unwrap(), ds);
                }
                if let Ok(p) = PartialConfig::from_toml_str(piece) {
                    let _ = ExperimentConfig::try_from(p);
                }
            }
        }
    }
}
