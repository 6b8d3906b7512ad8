#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(values) = crbsel::harness::parse_real_list(text) else { return };
    assert!(values.iter().all(|v| v.is_finite()));
    // a parsed list is a valid geometry exactly when it is strictly increasing
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    if let Ok(g) = crbsel::ArrayGeometry::new(values) {
        assert!(increasing);
        assert!(g.translated(1.0).is_ok());
    }
});
