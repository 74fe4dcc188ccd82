use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::fmt_f64;

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows written to `<name>.csv`, in a fixed column order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Float(v) => out.push_str(&fmt_f64(*v)),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// An experiment result that can be written as CSV rows plus a JSON summary.
pub trait Report: Serialize {
    /// File stem, e.g. `mc_study`.
    fn name(&self) -> &'static str;

    fn table(&self) -> Table;
}

/// `emit_report`: writes `<dir>/<name>.csv` and `<dir>/<name>.json`,
/// creating `dir` if needed. Returns both paths.
pub fn emit_report<R: Report + ?Sized>(report: &R, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(format!("{}.csv", report.name()));
    let json = dir.join(format!("{}.json", report.name()));
    std::fs::write(&csv, report.table().to_csv()).map_err(|e| Error::io(&csv, e))?;
    std::fs::write(&json, crate::json::to_string(report)).map_err(|e| Error::io(&json, e))?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Empty {
        rows: Vec<f64>,
    }

    impl Report for Empty {
        fn name(&self) -> &'static str {
            "empty"
        }

        fn table(&self) -> Table {
            Table::new(&["a", "b"])
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let (csv, json) = emit_report(&Empty { rows: vec![] }, dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(csv).unwrap(), "a,b\n");
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(v["rows"], serde_json::json!([]));
    }

    #[test]
    fn csv_formatting() {
        let mut t = Table::new(&["k", "x", "tag"]);
        t.push(vec![3usize.into(), 0.1.into(), "ok".into()]);
        assert_eq!(t.to_csv(), "k,x,tag\n3,1.0000000000000001e-1,ok\n");
    }

    #[test]
    fn unwritable_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let err = emit_report(&Empty { rows: vec![] }, file.join("sub")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 3);
    }
}
