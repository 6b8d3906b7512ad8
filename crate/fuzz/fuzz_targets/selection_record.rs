#![no_main]

use libfuzzer_sys::fuzz_target;
use crbsel::harness::SelectionRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(record) = SelectionRecord::from_json(text) else { return };
    let again = SelectionRecord::from_json(&record.to_json().unwrap()).unwrap();
    assert_eq!(again, record);
    let _ = record.selection();
    let _ = record.geometry();
});
