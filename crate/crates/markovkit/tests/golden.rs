//! Basis index `((a·d_B + b)·d_C + c)`: the first listed subsystem is the most
//! significant digit. The stored reports pin that convention for vector and matrix
//! inputs on dims (2, 2, 3).

use std::path::Path;
use std::process::Command;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn info(file: &str) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_markovkit"))
        .args(["info", &data(file)])
        .output()
        .unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn vector_index_convention_matches_golden_report() {
    let expected = std::fs::read_to_string(data("index_vector.info.json")).unwrap();
    assert_eq!(info("index_vector.json"), expected);
}

#[test]
fn matrix_index_convention_matches_golden_report() {
    let expected = std::fs::read_to_string(data("index_matrix.info.json")).unwrap();
    assert_eq!(info("index_matrix.json"), expected);
}

#[test]
fn library_reads_the_same_convention() {
    let tol = markovkit::Tolerances::default();
    let s = markovkit::state_file::read_state(Path::new(&data("index_vector.json")), &tol).unwrap();
    let rho = s.density();
    for (label, hot) in [("A", 0), ("B", 1), ("C", 2)] {
        let m = rho.partial_trace(&[label]).unwrap();
        assert!((m.matrix()[(hot, hot)].re - 1.0).abs() < 1e-15, "{label}");
    }
}
