#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = crbsel::harness::parse_count_list(text) {
        let joined = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(crbsel::harness::parse_count_list(&joined).unwrap(), values);
    }
});
