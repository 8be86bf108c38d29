//! JSON state files: `{"name", "dim", "matrix": [[[re, im], ...], ...], "shape": [dA, dR]}`.

use std::fs;
use std::path::Path;

use measdiv::{BipartiteShape, CMatrix, Hermitian, PositiveOperator};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::output::round12;

/// Relative Hermiticity defect above which an input is rejected instead of repaired.
const HERMITIAN_REJECT: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub name: String,
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<[usize; 2]>,
}

#[derive(Debug)]
pub struct LoadedState {
    pub path: String,
    pub name: String,
    pub state: PositiveOperator,
    pub shape: Option<BipartiteShape>,
    /// SHA-256 of the file bytes, hex encoded.
    pub digest: String,
    /// Frobenius norm of the anti-Hermitian part removed on load.
    pub adjustment: f64,
}

impl StateFile {
    pub fn from_operator(name: &str, op: &Hermitian, shape: Option<BipartiteShape>) -> Self {
        let m = op.matrix();
        let n = op.dim();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| [round12(m[(i, j)].re), round12(m[(i, j)].im)]).collect())
            .collect();
        StateFile { name: name.to_string(), dim: n, matrix, shape: shape.map(|s| [s.dim_a, s.dim_r]) }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|source| CliError::Json { path: path.display().to_string(), source })?;
        fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.display().to_string(), source })
    }

    fn to_matrix(&self, path: &str) -> CliResult<CMatrix> {
        if self.dim == 0 {
            return Err(CliError::Input(format!("{path}: dim must be at least 1")));
        }
        if self.matrix.len() != self.dim || self.matrix.iter().any(|r| r.len() != self.dim) {
            return Err(CliError::Input(format!("{path}: matrix is not {0}x{0}", self.dim)));
        }
        if self.matrix.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::Input(format!("{path}: matrix has non-finite entries")));
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.matrix[i][j];
            C64::new(re, im)
        }))
    }
}

pub fn load_state(path: &Path) -> CliResult<LoadedState> {
    let shown = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: shown.clone(), source })?;
    let file: StateFile =
        serde_json::from_slice(&bytes).map_err(|source| CliError::Json { path: shown.clone(), source })?;
    let raw = file.to_matrix(&shown)?;
    let op = Hermitian::new(raw.clone()).map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
    let adjustment = raw.sub(op.matrix()).frobenius_norm();
    if adjustment > HERMITIAN_REJECT * raw.frobenius_norm().max(1.0) {
        return Err(CliError::Input(format!("{shown}: matrix is not Hermitian (defect {adjustment:e})")));
    }
    let shape = match file.shape {
        Some([a, r]) => {
            let s = BipartiteShape::new(a, r).map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
            if s.total() != file.dim {
                return Err(CliError::Input(format!("{shown}: shape {a}x{r} does not match dim {}", file.dim)));
            }
            Some(s)
        }
        None => None,
    };
    let state = PositiveOperator::new(op).map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
    Ok(LoadedState {
        path: shown,
        name: file.name,
        state,
        shape,
        digest: hex::encode(Sha256::digest(&bytes)),
        adjustment,
    })
}
