//! On-disk formats: state files and run records.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use squash::moment::BoundResult;
use squash::qstate::CMat;
use squash::DensityMatrix;

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixParts {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// A bipartite density matrix as JSON, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: MatrixParts,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let dims = rho.dims();
        let m = rho.matrix();
        let rows = |f: fn(Complex64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(m[(i, j)])).collect()).collect();
        StateFile { dims: [dims[0], dims[1]], matrix: MatrixParts { re: rows(|z| z.re), im: rows(|z| z.im) } }
    }

    pub fn to_state(&self) -> Result<DensityMatrix, CliError> {
        let n = self.dims[0] * self.dims[1];
        let MatrixParts { re, im } = &self.matrix;
        let square = |a: &Vec<Vec<f64>>| a.len() == n && a.iter().all(|r| r.len() == n);
        if n == 0 || !square(re) || !square(im) {
            return Err(CliError::input(format!(
                "state matrix must be {n}x{n} for dims {:?} in both re and im",
                self.dims
            )));
        }
        let data = CMat::from_fn(n, n, |i, j| Complex64::new(re[i][j], im[i][j]));
        Ok(DensityMatrix::new(self.dims.to_vec(), data)?)
    }
}

pub fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let file: StateFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed state file {}: {e}", path.display())))?;
    file.to_state()
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub input_hash: String,
    pub command: String,
    pub parameters: serde_json::Value,
    pub result: BoundResult,
    pub tool_version: String,
    pub timestamp: chrono::DateTime<chrono::Utc>,
}

impl RunRecord {
    pub fn new(rho: &DensityMatrix, command: &str, parameters: serde_json::Value, result: BoundResult) -> Self {
        RunRecord {
            input_hash: squash::moment::state_hash(rho),
            command: command.to_string(),
            parameters,
            result,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use squash::moment::BoundKind;
    use squash::solver::Status;

    #[test]
    fn run_record_round_trips() {
        let rho = squash::qstate::werner(2, 0.25).unwrap();
        let mut result = BoundResult::new(BoundKind::UpperHeuristic, 0.123456789012345678, Status::Optimal);
        result.d_d = Some(3);
        result.notes.push("x".into());
        let rec = RunRecord::new(&rho, "upper", serde_json::json!({"seed": 7}), result);
        let text = serde_json::to_string(&rec).unwrap();
        let back: RunRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn state_file_round_trips() {
        let rho = squash::qstate::werner(3, 0.7).unwrap();
        let text = serde_json::to_string(&StateFile::from_state(&rho)).unwrap();
        let back = serde_json::from_str::<StateFile>(&text).unwrap().to_state().unwrap();
        assert_eq!(back.dims(), rho.dims());
        assert!((back.matrix() - rho.matrix()).iter().all(|z| z.norm() <= 1e-15));
    }
}
