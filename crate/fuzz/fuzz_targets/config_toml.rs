#![no_main]

use libfuzzer_sys::fuzz_target;
use ring_photon::config::{ExperimentConfig, PartialConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(partial) = PartialConfig::from_toml_str(text) {
        if let Ok(config) = ExperimentConfig::try_from(partial) {
            assert!((1..=200).contains(&config.n_sites));
            assert!(config.spacing > 0.0 && config.spacing <= 10.0);
            assert!((0.0..=std::f64::consts::PI).contains(&config.theta_l));
        }
    }
});
