//! Serde helpers for complex numbers and dense matrices.
//!
//! A complex scalar is written as `[re, im]`; a bare number is accepted on
//! input as a real scalar.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FrameError, Result};
use crate::linalg::{CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonComplex(pub Complex64);

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl Serialize for JsonComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match ComplexRepr::deserialize(d)? {
            ComplexRepr::Pair([re, im]) => JsonComplex(Complex64::new(re, im)),
            ComplexRepr::Real(re) => JsonComplex(Complex64::new(re, 0.0)),
        })
    }
}

pub fn vec_to_json(v: &CVec) -> Vec<JsonComplex> {
    v.iter().map(|&z| JsonComplex(z)).collect()
}

pub fn vec_from_json(v: &[JsonComplex]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|z| z.0))
}

/// Columns of `m`, each as a list of complex entries.
pub fn columns_to_json(m: &CMat) -> Vec<Vec<JsonComplex>> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|&z| JsonComplex(z)).collect())
        .collect()
}

/// Build a `rows x cols.len()` matrix from a list of columns.
pub fn columns_from_json(rows: usize, cols: &[Vec<JsonComplex>]) -> Result<CMat> {
    for (j, col) in cols.iter().enumerate() {
        if col.len() != rows {
            return Err(FrameError::DimensionMismatch(format!(
                "column {} has length {}, expected {}",
                j,
                col.len(),
                rows
            )));
        }
    }
    Ok(CMat::from_fn(rows, cols.len(), |r, j| cols[j][r].0))
}

/// Row-major list of rows.
pub fn rows_to_json(m: &CMat) -> Vec<Vec<JsonComplex>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|&z| JsonComplex(z)).collect())
        .collect()
}

pub fn rows_from_json(rows: &[Vec<JsonComplex>]) -> Result<CMat> {
    let ncols = rows.first().map_or(0, |r| r.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(FrameError::DimensionMismatch(format!(
                "row {} has length {}, expected {}",
                i,
                row.len(),
                ncols
            )));
        }
    }
    Ok(CMat::from_fn(rows.len(), ncols, |i, j| rows[i][j].0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_pairs_and_reals() {
        let v: Vec<JsonComplex> = serde_json::from_str("[[1.0, -2.0], 3.5]").unwrap();
        assert_eq!(v[0].0, Complex64::new(1.0, -2.0));
        assert_eq!(v[1].0, Complex64::new(3.5, 0.0));
        assert_eq!(serde_json::to_string(&v).unwrap(), "[[1.0,-2.0],[3.5,0.0]]");
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: Vec<Vec<JsonComplex>> = serde_json::from_str("[[1,2],[3]]").unwrap();
        assert!(matches!(rows_from_json(&rows), Err(FrameError::DimensionMismatch(_))));
    }
}
