#![no_main]

use libfuzzer_sys::fuzz_target;
use ring_photon::config::{parse_grid, MAX_GRID};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((nt, np)) = parse_grid(text) {
        assert!((2..=MAX_GRID).contains(&nt) && (4..=MAX_GRID).contains(&np));
    }
});
