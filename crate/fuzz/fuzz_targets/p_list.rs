#![no_main]

use libfuzzer_sys::fuzz_target;
use ring_photon::config::parse_p_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_p_list(text) {
        assert!(!list.is_empty());
    }
});
