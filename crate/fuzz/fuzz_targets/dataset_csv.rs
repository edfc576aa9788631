#![no_main]

use libfuzzer_sys::fuzz_target;
use ring_photon::dataset::Dataset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = Dataset::parse_csv(text) {
        let again = Dataset::parse_csv(&ds.to_csv()).expect("rendered CSV parses");
        assert_eq!(again, ds);
    }
});
