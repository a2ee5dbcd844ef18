//! CSV tables with a provenance comment line.

use crate::error::{Error, Result};
use std::path::Path;

pub const CSV_VERSION: &str = "sgqei-csv v1";

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, command: &str, sha: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        let body = String::from_utf8(body).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(format!("# {CSV_VERSION}; command={command}; config_sha256={sha}\n{body}"))
    }

    pub fn write(&self, path: &Path, command: &str, sha: &str) -> Result<()> {
        std::fs::write(path, self.render(command, sha)?)?;
        Ok(())
    }
}

/// Shortest round-trip rendering.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn status(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}
