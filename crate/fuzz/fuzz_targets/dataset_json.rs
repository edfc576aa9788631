#![no_main]

use libfuzzer_sys::fuzz_target;
use ring_photon::dataset::Dataset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = Dataset::parse_json(text) {
        let again = Dataset::parse_json(&ds.to_json()).expect("rendered JSON parses");
        assert_eq!(again, ds);
    }
});
