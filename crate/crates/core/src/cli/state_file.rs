//! JSON state files:
//! `{"dims": [2, 2], "matrix": [[re, im], ...]}` (row-major density matrix) or
//! `{"dims": [2, 2], "vector": [[re, im], ...]}` (state vector).

use serde::Deserialize;

use crate::error::{CcrError, Result};
use crate::qstate::linalg::{c, CMatrix, CVector};
use crate::qstate::{DensityMatrix, PureState};

#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateInput {
    pub fn density(&self) -> DensityMatrix {
        match self {
            StateInput::Pure(p) => p.density(),
            StateInput::Mixed(m) => m.clone(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            StateInput::Pure(p) => p.dims(),
            StateInput::Mixed(m) => m.dims(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dims: Vec<usize>,
    matrix: Option<Vec<[f64; 2]>>,
    vector: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(try_from = "RawFile")]
struct StateFile(StateInput);

impl TryFrom<RawFile> for StateFile {
    type Error = String;

    fn try_from(raw: RawFile) -> std::result::Result<Self, String> {
        let total = raw.dims.iter().product::<usize>();
        if raw.dims.is_empty() || raw.dims.contains(&0) {
            return Err(format!("dims {:?} must be a non-empty list of positive integers", raw.dims));
        }
        let entries = |v: &[[f64; 2]]| v.iter().map(|[re, im]| c(*re, *im)).collect::<Vec<_>>();
        let state = match (raw.matrix, raw.vector) {
            (Some(m), None) => {
                if m.len() != total * total {
                    return Err(format!("matrix has {} entries, dims {:?} need {}", m.len(), raw.dims, total * total));
                }
                let mat = CMatrix::from_row_slice(total, total, &entries(&m));
                StateInput::Mixed(DensityMatrix::new(raw.dims, mat).map_err(|e| e.to_string())?)
            }
            (None, Some(v)) => {
                if v.len() != total {
                    return Err(format!("vector has {} entries, dims {:?} need {total}", v.len(), raw.dims));
                }
                let amps = CVector::from_vec(entries(&v));
                StateInput::Pure(PureState::new(raw.dims, amps).map_err(|e| e.to_string())?)
            }
            _ => return Err("exactly one of `matrix` or `vector` is required".into()),
        };
        Ok(StateFile(state))
    }
}

/// Parses a state file; every failure carries the line and column where it
/// was detected.
pub fn parse_state(text: &str) -> Result<StateInput> {
    serde_json::from_str::<StateFile>(text)
        .map(|f| f.0)
        .map_err(|e| CcrError::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = r#"{"dims": [2, 2], "vector": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]}"#;

    #[test]
    fn parses_vector_and_matrix() {
        let s = parse_state(BELL).unwrap();
        assert!(matches!(s, StateInput::Pure(_)));
        assert_eq!(s.dims(), &[2, 2]);
        let m = parse_state(r#"{"dims":[2],"matrix":[[0.75,0],[0,0],[0,0],[0.25,0]]}"#).unwrap();
        assert!((m.density().matrix()[(0, 0)].re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_state("{\n  \"dims\": [2],\n  \"vector\": [[1, 0], [0 0]]\n}").unwrap_err();
        match err {
            CcrError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_are_parse_errors() {
        for bad in [
            r#"{"dims":[2],"vector":[[1,0]]}"#,
            r#"{"dims":[2],"vector":[[1,0],[1,0]]}"#,
            r#"{"dims":[2]}"#,
            r#"{"dims":[2],"vector":[[1,0],[0,0]],"matrix":[[1,0],[0,0],[0,0],[0,0]]}"#,
            r#"{"dims":[2],"matrix":[[1,0],[1,0],[0,0],[0,0]]}"#,
            r#"{"dims":[],"vector":[[1,0]]}"#,
            r#"{"dims":[2],"vector":[[1,0],[0,0]],"extra":1}"#,
        ] {
            assert!(matches!(parse_state(bad), Err(CcrError::Parse { .. })), "{bad}");
        }
    }
}
