#![no_main]

use libfuzzer_sys::fuzz_target;
use crbsel::conic::ConicProblem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(problem) = ConicProblem::from_json(text) else { return };
    let again = ConicProblem::from_json(&problem.to_json().unwrap()).unwrap();
    assert_eq!(again, problem);
    let x = vec![0.0; problem.num_vars];
    let _ = problem.objective_value(&x);
});
