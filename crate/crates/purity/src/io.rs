//! State file format, shared repo-wide.
//!
//! A state is a JSON object `{"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}`
//! with row-major entries; `dims` has a single element for monopartite states.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qmat::{BipartiteState, CMatrix, CVector, DensityMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// A parsed state: monopartite or bipartite according to `dims`.
#[derive(Debug, Clone)]
pub enum LoadedState {
    Mono(DensityMatrix),
    Bipartite(BipartiteState),
}

impl LoadedState {
    pub fn density(&self) -> &DensityMatrix {
        match self {
            LoadedState::Mono(d) => d,
            LoadedState::Bipartite(s) => s.state(),
        }
    }

    pub fn bipartite(&self) -> Result<&BipartiteState> {
        match self {
            LoadedState::Bipartite(s) => Ok(s),
            LoadedState::Mono(_) => Err(Error::DimensionMismatch(
                "command requires a bipartite state (dims = [dA, dB])".into(),
            )),
        }
    }
}

fn matrix_from_entries(entries: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = entries.len();
    if n == 0 || entries.iter().any(|row| row.len() != n) {
        return Err(Error::Parse("matrix must be square and non-empty".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(entries[i][j][0], entries[i][j][1])
    }))
}

pub fn parse_state(json: &str) -> Result<LoadedState> {
    let file: StateFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let mat = matrix_from_entries(&file.matrix)?;
    match file.dims.as_slice() {
        [d] => {
            if *d != mat.nrows() {
                return Err(Error::Parse(format!(
                    "dims [{d}] vs matrix size {}",
                    mat.nrows()
                )));
            }
            Ok(LoadedState::Mono(DensityMatrix::new(mat)?))
        }
        [da, db] => Ok(LoadedState::Bipartite(BipartiteState::from_matrix(*da, *db, mat)?)),
        other => Err(Error::Parse(format!(
            "dims must have one or two entries, got {}",
            other.len()
        ))),
    }
}

pub fn load_state(path: &Path) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text)
}

fn entries_from_matrix(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn density_to_file(d: &DensityMatrix) -> StateFile {
    StateFile { dims: vec![d.dim()], matrix: entries_from_matrix(d.matrix()) }
}

pub fn bipartite_to_file(s: &BipartiteState) -> StateFile {
    StateFile {
        dims: vec![s.dim_a(), s.dim_b()],
        matrix: entries_from_matrix(s.matrix()),
    }
}

/// Rank-1 POVM file: `{"vectors": [[[re, im], ...], ...]}`, one unnormalized
/// vector per outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmFile {
    pub vectors: Vec<Vec<[f64; 2]>>,
}

pub fn parse_povm_vectors(json: &str) -> Result<Vec<CVector>> {
    let file: PovmFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    if file.vectors.is_empty() {
        return Err(Error::Parse("povm file lists no vectors".into()));
    }
    let dim = file.vectors[0].len();
    file.vectors
        .iter()
        .map(|v| {
            if v.len() != dim {
                return Err(Error::Parse("povm vectors differ in dimension".into()));
            }
            Ok(CVector::from_iterator(
                dim,
                v.iter().map(|e| Complex64::new(e[0], e[1])),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bipartite() {
        let s = BipartiteState::common_randomness_bit();
        let json = serde_json::to_string(&bipartite_to_file(&s)).unwrap();
        match parse_state(&json).unwrap() {
            LoadedState::Bipartite(out) => assert_eq!(out.matrix(), s.matrix()),
            _ => panic!("expected bipartite"),
        }
    }

    #[test]
    fn rejects_ragged_matrix() {
        let json = r#"{"dims": [2], "matrix": [[[1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}"#;
        assert!(parse_state(json).is_err());
    }

    #[test]
    fn rejects_bad_dims() {
        let json = r#"{"dims": [2, 2, 2], "matrix": [[[1.0, 0.0]]]}"#;
        assert!(parse_state(json).is_err());
    }
}
