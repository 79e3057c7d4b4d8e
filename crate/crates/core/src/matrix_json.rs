//! Matrix exchange format: `{"dim": n, "re": [[..]], "im": [[..]]}`, with
//! row-major `n x n` arrays.
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, DensityOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..n).map(|i| (0..n).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Ok(Self {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        })
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for (part, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != n {
                return Err(Error::InvalidInput(format!(
                    "\"{part}\" has {} rows, expected {n}",
                    rows.len()
                )));
            }
            if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "\"{part}\" row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Result<String> {
    let doc = MatrixJson::from_matrix(m)?;
    serde_json::to_string(&doc).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Parses a matrix document; syntax errors carry line and column.
pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    let doc: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.to_matrix()
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text)
}

/// Reads a matrix file and validates it as a density operator.
pub fn read_density(path: &Path) -> Result<DensityOperator> {
    DensityOperator::from_matrix(read_matrix(path)?)
}
