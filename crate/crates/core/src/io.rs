//! JSON and CSV encodings.
//!
//! Matrices are stored as `{"dim": d, "re": [[...]], "im": [[...]]}`, row
//! major. Floats are written with enough digits to reload bit-identically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{c, Matrix};
use crate::operator::HermitianOperator;
use crate::state::DensityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Matrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { dim: m.nrows(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let d = self.dim;
        let shape_ok = |rows: &[Vec<f64>]| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&self.re) {
            return Err(Error::Format(format!("\"re\" is not a {d}x{d} array")));
        }
        if !shape_ok(&self.im) {
            return Err(Error::Format(format!("\"im\" is not a {d}x{d} array")));
        }
        Ok(Matrix::from_fn(d, d, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

pub fn serialize_matrix<S: Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

pub fn serialize_state<S: Serializer>(rho: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    serialize_matrix(rho.matrix(), s)
}

/// Parse a single operator, reporting the line and column of syntax errors.
pub fn matrix_from_json(text: &str) -> Result<Matrix> {
    let parsed: MatrixJson = parse(text)?;
    parsed.to_matrix()
}

pub fn matrix_to_json(m: &Matrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from_matrix(m)).expect("plain data")
}

pub fn operator_from_json(text: &str) -> Result<HermitianOperator> {
    HermitianOperator::new(matrix_from_json(text)?)
}

pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(matrix_from_json(text)?)
}

pub(crate) fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Named operators plus free-form numeric parameters, as read by the command
/// line tool.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorBundle {
    #[serde(default)]
    pub operators: BTreeMap<String, MatrixJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lists: BTreeMap<String, Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub numbers: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub indices: BTreeMap<String, Vec<usize>>,
}

impl OperatorBundle {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn insert(&mut self, name: &str, m: &Matrix) {
        self.operators.insert(name.to_owned(), MatrixJson::from_matrix(m));
    }

    pub fn insert_list(&mut self, name: &str, ms: &[Matrix]) {
        self.lists.insert(name.to_owned(), ms.iter().map(MatrixJson::from_matrix).collect());
    }

    pub fn matrix(&self, name: &str) -> Result<Matrix> {
        self.operators
            .get(name)
            .ok_or_else(|| Error::Format(format!("missing operator \"{name}\"")))?
            .to_matrix()
            .map_err(|e| Error::Format(format!("operator \"{name}\": {e}")))
    }

    pub fn operator(&self, name: &str) -> Result<HermitianOperator> {
        HermitianOperator::new(self.matrix(name)?)
    }

    pub fn state(&self, name: &str) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix(name)?)
    }

    pub fn operator_list(&self, name: &str) -> Result<Vec<HermitianOperator>> {
        let list = self.lists.get(name).ok_or_else(|| Error::Format(format!("missing operator list \"{name}\"")))?;
        list.iter()
            .enumerate()
            .map(|(k, m)| {
                m.to_matrix()
                    .and_then(HermitianOperator::new)
                    .map_err(|e| Error::Format(format!("\"{name}\"[{k}]: {e}")))
            })
            .collect()
    }

    pub fn numbers(&self, name: &str) -> Result<&[f64]> {
        self.numbers
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Format(format!("missing number list \"{name}\"")))
    }
}

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// CSV with a header row; every cell is formatted by [`fmt_f64`].
pub fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = Matrix::from_fn(3, 3, |i, j| c(0.1 * i as f64 + 1.0 / 3.0, (j as f64).sqrt() - 1e-300));
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn format_errors_carry_position() {
        let err = matrix_from_json("{\n  \"dim\": 2,\n  \"re\": [[1, 0], [0, 1]],\n  \"im\": oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        let err = matrix_from_json(r#"{"dim": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}"#).unwrap_err();
        assert!(err.to_string().contains("\"re\""), "{err}");
    }

    #[test]
    fn bundle_lookup() {
        let mut b = OperatorBundle::default();
        b.insert("z", &pauli::z());
        b.insert_list("charges", &[pauli::x(), pauli::y()]);
        let back = OperatorBundle::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.operator_list("charges").unwrap().len(), 2);
        assert!(back.state("z").is_err());
        assert!(back.matrix("missing").unwrap_err().to_string().contains("missing"));
    }

    #[test]
    fn csv_precision() {
        let csv = write_csv(&["a", "b"], vec![vec![0.1, 1.0 / 3.0]]);
        let row = csv.lines().nth(1).unwrap();
        let parsed: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.1, 1.0 / 3.0]);
    }
}
