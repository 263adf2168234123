use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, SpectralError};

/// Row-major JSON form of a square complex matrix:
/// `{"dim": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Result<Self, SpectralError> {
        if !m.is_square() {
            return Err(SpectralError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Ok(Self { dim: n, re, im })
    }

    pub fn to_matrix(&self) -> Result<CMatrix, SpectralError> {
        let n = self.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&self.re) || !rows_ok(&self.im) {
            return Err(SpectralError::Json(format!(
                "expected {n}x{n} arrays for both \"re\" and \"im\""
            )));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn parse(text: &str) -> Result<CMatrix, SpectralError> {
        let parsed: MatrixJson =
            serde_json::from_str(text).map_err(|e| SpectralError::Json(e.to_string()))?;
        parsed.to_matrix()
    }

    pub fn render(m: &CMatrix) -> Result<String, SpectralError> {
        let json = Self::from_matrix(m)?;
        serde_json::to_string(&json).map_err(|e| SpectralError::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_layout() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, -1.0),
                Complex64::new(2.0, 1.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        let text = MatrixJson::render(&m).unwrap();
        assert_eq!(
            text,
            r#"{"dim":2,"re":[[1.0,2.0],[2.0,0.5]],"im":[[0.0,-1.0],[1.0,0.0]]}"#
        );
        assert_eq!(MatrixJson::parse(&text).unwrap(), m);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let bad = r#"{"dim":2,"re":[[1.0,2.0],[2.0]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(MatrixJson::parse(bad), Err(SpectralError::Json(_))));
    }
}
