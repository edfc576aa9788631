//! Runs one configured experiment and produces its dataset.

use serde_json::{json, Value};

use crate::analysis::{local_maxima, profile_maxima, relative_l2};
use crate::atomic_states::{mode_decomposition, pair_state, spin_wave};
use crate::config::{Command, ExperimentConfig};
use crate::dataset::{golden_check, Dataset, GoldenReport, UNITS};
use crate::dipole_kernel::{degree_of_collectivity, LaserDrive};
use crate::emission::{perpendicular_intensity, EmissionKernel, IntensityMap};
use crate::error::{invalid, Error, Result};
use crate::geometry::{build_angular_grid, build_ring, AngularGrid, Direction};
use crate::oracle::{oracle_single_intensity, DenseSystem, ModeGrid};
use crate::VERSION;

/// Peaks listed in map metadata.
const LISTED_PEAKS: usize = 4;

/// Largest ring the dense oracle is run on.
pub const ORACLE_MAX_SITES: usize = 40;

pub struct Outcome {
    pub dataset: Dataset,
    pub golden: Option<GoldenReport>,
}

pub fn run(config: &ExperimentConfig) -> Result<Dataset> {
    let mut ds = match config.command {
        Command::Intensity => intensity(config)?,
        Command::IntensityPerp => intensity_perp(config)?,
        Command::PairIntensity => pair_intensity(config)?,
        Command::G2Map => g2_map(config)?,
        Command::Overlaps => overlaps(config)?,
        Command::Modes => modes(config)?,
        Command::OracleCheck => oracle_check(config)?,
    };
    let mut head = Dataset::new(&[]);
    head.set("command", config.command.name());
    head.set("units", UNITS);
    head.set("version", VERSION);
    head.set("n_sites", config.n_sites);
    if config.command != Command::Overlaps {
        head.set("spacing", config.spacing);
        head.set("theta_l", config.theta_l);
        head.set("phi_l", config.phi_l);
    }
    if matches!(config.command, Command::PairIntensity | Command::G2Map | Command::Overlaps) {
        head.set("p", json!(config.p));
    }
    head.metadata.append(&mut ds.metadata);
    ds.metadata = head.metadata;
    Ok(ds)
}

/// [`run`], then compare against `config.check_against` if set.
pub fn run_and_check(config: &ExperimentConfig) -> Result<Outcome> {
    let dataset = run(config)?;
    let golden = match &config.check_against {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let reference = Dataset::parse(&text)?;
            Some(golden_check(&dataset, &reference, config.tolerance)?)
        }
        None => None,
    };
    Ok(Outcome { dataset, golden })
}

fn kernel(config: &ExperimentConfig) -> Result<EmissionKernel> {
    EmissionKernel::new(
        build_ring(config.n_sites, config.spacing)?,
        LaserDrive::new(config.theta_l, config.phi_l)?,
    )
}

fn grid(config: &ExperimentConfig) -> Result<AngularGrid> {
    build_angular_grid(config.grid.0, config.grid.1)
}

fn peaks_json(map: &IntensityMap) -> Value {
    let peaks: Vec<Value> = local_maxima(&map.grid, &map.values)
        .iter()
        .take(LISTED_PEAKS)
        .map(|p| json!({"theta": p.direction.theta(), "phi": p.direction.phi(), "value": p.value}))
        .collect();
    Value::Array(peaks)
}

fn with_peaks(map: &IntensityMap) -> Dataset {
    let mut ds = Dataset::from_intensity_map(map);
    ds.set("peaks", peaks_json(map));
    ds
}

fn intensity(config: &ExperimentConfig) -> Result<Dataset> {
    let map = kernel(config)?.single_photon_map(&grid(config)?)?;
    Ok(with_peaks(&map))
}

fn intensity_perp(config: &ExperimentConfig) -> Result<Dataset> {
    if config.theta_l != 0.0 {
        return Err(Error::DriveNotPerpendicular { theta: config.theta_l });
    }
    let k = kernel(config)?;
    let g = grid(config)?;
    let source = crate::emission::MapSource {
        observable: "perpendicular intensity".into(),
        n_sites: config.n_sites,
        spacing: config.spacing,
        theta_l: 0.0,
        phi_l: config.phi_l,
    };
    let map = IntensityMap::evaluate(&g, source, |d| {
        perpendicular_intensity(&k, d).expect("drive checked perpendicular")
    })?;
    // azimuthal average as a polar profile
    let profile: Vec<f64> = (0..g.n_theta())
        .map(|i| (0..g.n_phi()).map(|j| map.value(i, j)).sum::<f64>() / g.n_phi() as f64)
        .collect();
    let maxima: Vec<Value> = profile_maxima(g.thetas(), &profile)
        .into_iter()
        .map(|(t, v)| json!({"theta": t, "value": v}))
        .collect();
    let mut ds = with_peaks(&map);
    ds.set("polar_maxima", Value::Array(maxima));
    ds.set("collective_rate", degree_of_collectivity(k.basis()));
    Ok(ds)
}

fn pair_intensity(config: &ExperimentConfig) -> Result<Dataset> {
    let psi = pair_state(config.n_sites, config.p[0])?;
    let map = kernel(config)?.pair_intensity_map(&psi, &grid(config)?)?;
    Ok(with_peaks(&map))
}

fn g2_map(config: &ExperimentConfig) -> Result<Dataset> {
    let k = kernel(config)?;
    let g = grid(config)?;
    let psi = pair_state(config.n_sites, config.p[0])?;
    let (reference, source) = match config.reference {
        Some((t, p)) => (Direction::new(t, p)?, "given"),
        None => {
            let pair = k.pair_intensity_map(&psi, &g)?;
            let best = local_maxima(&pair.grid, &pair.values)
                .first()
                .map(|p| p.direction)
                .ok_or_else(|| invalid("pair intensity has no maximum on the grid"))?;
            (best, "pair-intensity maximum")
        }
    };
    let map = k.g2_map(&psi, &reference, &g)?;
    let mut ds = Dataset::from_correlation_map(&map);
    ds.set("reference_source", source);
    Ok(ds)
}

fn overlaps(config: &ExperimentConfig) -> Result<Dataset> {
    let mut ds = Dataset::new(&["p", "l", "re", "im", "weight"]);
    let mut totals = Vec::new();
    for &p in &config.p {
        let xi = mode_decomposition(config.n_sites, p)?;
        let mut total = 0.0;
        for (l, x) in xi.iter().enumerate() {
            total += x.norm_sqr();
            ds.push_row(vec![Some(p as f64), Some(l as f64), Some(x.re), Some(x.im), Some(x.norm_sqr())]);
        }
        totals.push(json!({"p": p, "total_weight": total}));
    }
    ds.set("totals", Value::Array(totals));
    Ok(ds)
}

fn modes(config: &ExperimentConfig) -> Result<Dataset> {
    let k = kernel(config)?;
    let basis = k.basis();
    let mut ds = Dataset::new(&["k", "rate", "shift"]);
    ds.set("collective_rate", degree_of_collectivity(basis));
    ds.set("clamped_modes", json!(basis.clamped_modes()));
    for (m, d) in basis.eigenvalues().iter().enumerate() {
        ds.push_row(vec![Some(m as f64), Some(d.re), Some(d.im)]);
    }
    Ok(ds)
}

fn oracle_check(config: &ExperimentConfig) -> Result<Dataset> {
    if config.n_sites > ORACLE_MAX_SITES {
        return Err(invalid(format!("oracle-check supports at most {ORACLE_MAX_SITES} sites")));
    }
    let k = kernel(config)?;
    let g = grid(config)?;
    let closed = k.single_photon_map(&g)?;
    let system = DenseSystem::new(k.lattice())?;
    let modes = ModeGrid::for_system(g.clone(), &system)?;
    let wave = spin_wave(config.n_sites)?;
    let oracle = oracle_single_intensity(k.lattice(), k.drive(), &wave, &modes)?;
    let mut ds = Dataset::new(&["theta", "phi", "value", "oracle"]);
    ds.set("n_theta", g.n_theta());
    ds.set("n_phi", g.n_phi());
    ds.set("integral", closed.integral);
    ds.set("oracle_integral", oracle.integral);
    ds.set("relative_l2", relative_l2(&oracle.values, &closed.values, g.weights()));
    ds.set("bandwidth", modes.frequencies.bandwidth());
    ds.set("frequency_nodes", modes.frequencies.len());
    for ((d, c), o) in g.nodes().iter().zip(&closed.values).zip(&oracle.values) {
        ds.push_row(vec![Some(d.theta()), Some(d.phi()), Some(*c), Some(*o)]);
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;
    use std::f64::consts::PI;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::try_from(PartialConfig::from_toml_str(text).unwrap()).unwrap()
    }

    fn meta_f64(ds: &Dataset, key: &str) -> f64 {
        ds.metadata[key].as_f64().unwrap()
    }

    #[test]
    fn intensity_dataset_is_self_describing() {
        let c = config("command = \"intensity\"\nn-sites = 15\nspacing = 1.0\ntheta-l = \"pi/4\"\nphi-l = \"pi\"\ngrid = 64");
        let ds = run(&c).unwrap();
        let keys: Vec<&str> = ds.metadata.keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            ["command", "units", "version", "n_sites", "spacing", "theta_l", "phi_l", "n_theta", "n_phi", "integral", "peaks"]
        );
        assert_eq!(ds.rows.len(), 64 * 64);
        assert!((meta_f64(&ds, "integral") - 1.0).abs() < 1e-5);
        let peaks = ds.metadata["peaks"].as_array().unwrap();
        let mut thetas: Vec<f64> = peaks[..2].iter().map(|p| p["theta"].as_f64().unwrap()).collect();
        thetas.sort_by(f64::total_cmp);
        assert!((thetas[0] - PI / 4.0).abs() < 0.15 && (thetas[1] - 3.0 * PI / 4.0).abs() < 0.15);
    }

    #[test]
    fn output_is_deterministic() {
        let c = config("command = \"g2-map\"\nn-sites = 9\nspacing = 0.5\np = 2\ngrid = 12");
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.metadata["reference_source"], "pair-intensity maximum");
    }

    #[test]
    fn perpendicular_profile_maxima() {
        let c = config("command = \"intensity-perp\"\nn-sites = 20\nspacing = 0.43\ngrid = \"96x8\"");
        let ds = run(&c).unwrap();
        let maxima = ds.metadata["polar_maxima"].as_array().unwrap();
        let thetas: Vec<f64> = maxima.iter().map(|m| m["theta"].as_f64().unwrap()).collect();
        assert!(thetas.iter().any(|t| (t - 1.0).abs() < 0.1), "{thetas:?}");
        assert!(thetas.iter().any(|t| (t - 0.5).abs() < 0.1), "{thetas:?}");
        let tilted = config("command = \"intensity-perp\"\nn-sites = 20\nspacing = 0.43\ntheta-l = 0.1");
        assert!(matches!(run(&tilted), Err(Error::DriveNotPerpendicular { .. })));
    }

    #[test]
    fn overlaps_table() {
        let ds = run(&config("command = \"overlaps\"\nn-sites = 40\np = [1, 5, 10]")).unwrap();
        assert_eq!(ds.rows.len(), 3 * 21);
        assert!(!ds.metadata.contains_key("spacing"));
        for t in ds.metadata["totals"].as_array().unwrap() {
            assert!((t["total_weight"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        }
        let first = &ds.rows[0];
        assert_eq!(first[0], Some(1.0));
        assert!((first[4].unwrap() - 0.81).abs() < 0.01);
    }

    #[test]
    fn modes_table() {
        let ds = run(&config("command = \"modes\"\nn-sites = 10\nspacing = 0.1")).unwrap();
        assert_eq!(ds.columns, ["k", "rate", "shift"]);
        assert_eq!(ds.rows.len(), 10);
        assert!(meta_f64(&ds, "collective_rate") > 3.0);
    }

    #[test]
    fn oracle_check_agrees() {
        let ds = run(&config("command = \"oracle-check\"\nn-sites = 6\nspacing = 0.4\ntheta-l = 1.0\ngrid = \"8x8\"")).unwrap();
        assert!(meta_f64(&ds, "relative_l2") < 0.02);
        let too_big = config("command = \"oracle-check\"\nn-sites = 41\nspacing = 0.4");
        assert!(run(&too_big).is_err());
    }

    #[test]
    fn golden_check_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.json");
        let base = "command = \"pair-intensity\"\nn-sites = 8\nspacing = 0.5\ngrid = 16\n";
        std::fs::write(&path, run(&config(base)).unwrap().to_json()).unwrap();
        let c = config(&format!("{base}check-against = {:?}\ntolerance = 1e-12", path.to_str().unwrap()));
        let outcome = run_and_check(&c).unwrap();
        assert!(outcome.golden.unwrap().passed);
        let c = config(&format!("command = \"pair-intensity\"\nn-sites = 8\nspacing = 0.6\ngrid = 16\ncheck-against = {:?}\ntolerance = 0.005", path.to_str().unwrap()));
        assert!(!run_and_check(&c).unwrap().golden.unwrap().passed);
    }
}
