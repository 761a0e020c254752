//! JSON state files.
//!
//! ```json
//! {"systems": [{"name": "A", "dim": 2}, {"name": "B", "dim": 2}],
//!  "vector": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]]}
//! ```
//!
//! A mixed state carries `"matrix"` instead, a row-major list of rows of `[re, im]`
//! pairs. Basis index `i` enumerates the subsystems in the order listed, the first
//! subsystem being the most significant digit: for dims `(d₁, …, d_k)` the index of
//! `|x₁ … x_k⟩` is `((x₁·d₂ + x₂)·d₃ + …)·d_k + x_k`.

use std::fs;
use std::path::Path;

use markovkit_core::linalg::{Matrix, C64};
use markovkit_core::{DensityState, PureState, SystemLayout, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub systems: Vec<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
}

/// A state read from disk, kept pure when it was given as a vector.
#[derive(Clone, Debug)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityState),
}

impl LoadedState {
    pub fn layout(&self) -> &SystemLayout {
        match self {
            LoadedState::Pure(p) => p.layout(),
            LoadedState::Mixed(r) => r.layout(),
        }
    }

    pub fn density(&self) -> DensityState {
        match self {
            LoadedState::Pure(p) => p.to_density(),
            LoadedState::Mixed(r) => r.clone(),
        }
    }

    /// The state vector, also for density matrices of numerical rank one.
    pub fn pure(&self, tol: &Tolerances) -> Option<PureState> {
        match self {
            LoadedState::Pure(p) => Some(p.clone()),
            LoadedState::Mixed(r) => r.as_pure(tol),
        }
    }

    pub fn is_pure_input(&self) -> bool {
        matches!(self, LoadedState::Pure(_))
    }
}

pub fn layout_to_json(layout: &SystemLayout) -> Vec<SystemSpec> {
    layout
        .subsystems()
        .iter()
        .map(|(name, dim)| SystemSpec {
            name: name.clone(),
            dim: *dim,
        })
        .collect()
}

pub fn layout_from_json(systems: &[SystemSpec]) -> CliResult<SystemLayout> {
    Ok(SystemLayout::new(
        systems.iter().map(|s| (s.name.clone(), s.dim)),
    )?)
}

pub fn complex_to_json(z: C64) -> ComplexJson {
    [z.re, z.im]
}

pub fn vector_to_json(v: &[C64]) -> Vec<ComplexJson> {
    v.iter().map(|&z| complex_to_json(z)).collect()
}

pub fn matrix_to_json(m: &Matrix) -> MatrixJson {
    (0..m.rows()).map(|i| vector_to_json(m.row(i))).collect()
}

pub fn vector_from_json(v: &[ComplexJson]) -> Vec<C64> {
    v.iter().map(|z| C64::new(z[0], z[1])).collect()
}

pub fn matrix_from_json(rows: &[Vec<ComplexJson>]) -> CliResult<Matrix> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Format(format!(
                "matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        data.extend(vector_from_json(row));
    }
    Ok(Matrix::from_vec(n, n, data))
}

impl StateFile {
    pub fn from_pure(psi: &PureState) -> Self {
        StateFile {
            systems: layout_to_json(psi.layout()),
            vector: Some(vector_to_json(psi.vector())),
            matrix: None,
        }
    }

    pub fn from_density(rho: &DensityState) -> Self {
        StateFile {
            systems: layout_to_json(rho.layout()),
            vector: None,
            matrix: Some(matrix_to_json(rho.matrix())),
        }
    }

    /// Validates normalization (and positivity for matrices) within `tol.verify_tol`.
    pub fn into_state(self, tol: &Tolerances) -> CliResult<LoadedState> {
        let layout = layout_from_json(&self.systems)?;
        match (self.vector, self.matrix) {
            (Some(v), None) => Ok(LoadedState::Pure(PureState::new(
                layout,
                vector_from_json(&v),
                tol.verify_tol,
            )?)),
            (None, Some(m)) => Ok(LoadedState::Mixed(DensityState::new(
                layout,
                matrix_from_json(&m)?,
                tol.verify_tol,
            )?)),
            _ => Err(CliError::Format(
                "exactly one of `vector` and `matrix` must be present".into(),
            )),
        }
    }
}

pub fn parse_state(text: &str, tol: &Tolerances) -> CliResult<LoadedState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
    file.into_state(tol)
}

pub fn read_state(path: &Path, tol: &Tolerances) -> CliResult<LoadedState> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_state(&text, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_pure_and_mixed() {
        let tol = Tolerances::default();
        let text = r#"{"systems":[{"name":"A","dim":2}],"vector":[[0.6,0.0],[0.0,0.8]]}"#;
        let s = parse_state(text, &tol).unwrap();
        let LoadedState::Pure(p) = &s else {
            panic!("expected a vector")
        };
        let back = serde_json::to_string(&StateFile::from_pure(p)).unwrap();
        assert_eq!(back, text);
        let rho = s.density();
        assert!((rho.matrix()[(0, 1)] - C64::new(0.0, -0.48)).norm() < 1e-15);
        let m = StateFile::from_density(&rho);
        assert!(matches!(m.into_state(&tol).unwrap(), LoadedState::Mixed(_)));
    }

    #[test]
    fn rejects_malformed_files() {
        let tol = Tolerances::default();
        let both = r#"{"systems":[{"name":"A","dim":1}],"vector":[[1,0]],"matrix":[[[1,0]]]}"#;
        assert!(matches!(parse_state(both, &tol), Err(CliError::Format(_))));
        let ragged = r#"{"systems":[{"name":"A","dim":2}],"matrix":[[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(matches!(
            parse_state(ragged, &tol),
            Err(CliError::Format(_))
        ));
        let unnormalized = r#"{"systems":[{"name":"A","dim":2}],"vector":[[1,0],[1,0]]}"#;
        assert!(matches!(
            parse_state(unnormalized, &tol),
            Err(CliError::Core(_))
        ));
        let wrong_dim = r#"{"systems":[{"name":"A","dim":3}],"vector":[[1,0],[0,0]]}"#;
        assert!(parse_state(wrong_dim, &tol).is_err());
    }
}
