//! Result tables and their CSV form.
//!
//! Values are rounded to 12 significant digits when a row is added, and
//! written with the shortest representation that parses back to the same
//! `f64`. Parsing an emitted file therefore reproduces the table exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Column-named numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Rounds to 12 significant digits.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl ResultTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        ResultTable {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row.iter().map(|&x| quantize(x)).collect());
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty CSV document".into()))?;
        let mut table = ResultTable::new(&header.split(',').collect::<Vec<_>>());
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Config(format!("CSV row {}: bad number `{v}`", i + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != table.columns.len() {
                return Err(Error::DimensionMismatch {
                    expected: table.columns.len(),
                    got: row.len(),
                });
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// Writes `table` to `path`.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    table.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_only_when_empty() {
        let t = ResultTable::new(&["block", "phi"]);
        assert_eq!(t.to_csv(), "block,phi\n");
        assert_eq!(ResultTable::parse_csv(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn quantization() {
        assert_eq!(quantize(1.0 / 3.0), 0.333333333333);
        assert_eq!(quantize(2.0), 2.0);
        assert!(quantize(f64::NAN).is_nan());
        let mut t = ResultTable::new(&["a", "b"]);
        t.push(&[3.0, f64::NAN]).unwrap();
        assert_eq!(t.to_csv(), "a,b\n3,NaN\n");
        assert!(t.push(&[1.0]).is_err());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(ResultTable::parse_csv("a,b\n1\n").is_err());
        assert!(ResultTable::parse_csv("a\nx\n").is_err());
        assert!(ResultTable::parse_csv("").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e9f64..1e9, 3), 0..20)) {
            let mut t = ResultTable::new(&["x", "y", "z"]);
            for r in &rows {
                t.push(r).unwrap();
            }
            let back = ResultTable::parse_csv(&t.to_csv()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
