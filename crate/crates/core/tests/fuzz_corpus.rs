//! Replays the checked-in fuzz corpus through the parsers, with the same
//! checks the fuzz targets make.

use std::fs;
use std::path::PathBuf;

use crbsel::conic::ConicProblem;
use crbsel::harness::{parse_angle, parse_count_list, parse_real_list, SelectionRecord};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, String::from_utf8_lossy(&fs::read(&path).unwrap()).into_owned())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn angles() {
    let mut accepted = 0;
    for (_, text) in corpus("parse_angle") {
        if let Ok(v) = parse_angle(&text) {
            assert!(v.is_finite(), "{text:?}");
            accepted += 1;
        }
    }
    assert!(accepted >= 5);
}

#[test]
fn real_lists() {
    for (_, text) in corpus("parse_real_list") {
        if let Ok(values) = parse_real_list(&text) {
            assert!(values.iter().all(|v| v.is_finite()), "{text:?}");
        }
    }
}

#[test]
fn count_lists() {
    for (_, text) in corpus("parse_count_list") {
        if let Ok(values) = parse_count_list(&text) {
            let joined = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            assert_eq!(parse_count_list(&joined).unwrap(), values);
        }
    }
}

#[test]
fn selection_records() {
    let mut valid = Vec::new();
    for (name, text) in corpus("selection_record") {
        if let Ok(record) = SelectionRecord::from_json(&text) {
            assert_eq!(SelectionRecord::from_json(&record.to_json().unwrap()).unwrap(), record);
            valid.push(name);
        }
    }
    assert!(valid.contains(&"edge_n6".to_string()));
    assert!(!valid.contains(&"bad_method".to_string()));
}

#[test]
fn conic_problems() {
    let mut valid = Vec::new();
    for (name, text) in corpus("conic_problem") {
        if let Ok(problem) = ConicProblem::from_json(&text) {
            assert_eq!(ConicProblem::from_json(&problem.to_json().unwrap()).unwrap(), problem);
            valid.push(name);
        }
    }
    assert!(valid.contains(&"relaxation_n4".to_string()));
    assert!(!valid.contains(&"asymmetric_block".to_string()));
}
