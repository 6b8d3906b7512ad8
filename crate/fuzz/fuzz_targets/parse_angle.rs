#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = crbsel::harness::parse_angle(text) {
        assert!(v.is_finite());
    }
});
