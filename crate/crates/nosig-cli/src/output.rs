//! Machine-readable output: comma-separated tables with a header row and
//! floats at 17 significant digits, plus one JSON summary per run. Output
//! is a pure function of the scenario file and seed, so repeated runs are
//! byte-identical.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let path = self.path(name);
        let mut out = Vec::new();
        writeln!(out, "{}", header.join(",")).expect("in-memory write");
        for row in rows {
            writeln!(out, "{}", row.join(",")).expect("in-memory write");
        }
        std::fs::write(&path, out)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("cannot serialize summary: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

/// Rows of (component index, re, im) for a complex vector.
pub fn vector_rows(label: &str, v: &nosig::hilbert::CVector) -> Vec<Vec<String>> {
    v.entries()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            vec![
                label.to_string(),
                k.to_string(),
                fmt_f64(c.re),
                fmt_f64(c.im),
            ]
        })
        .collect()
}

/// Rows of (row, col, re, im) for a complex matrix.
pub fn matrix_rows(label: &str, m: &nosig::hilbert::CMatrix) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let c = m.get(i, j);
            rows.push(vec![
                label.to_string(),
                i.to_string(),
                j.to_string(),
                fmt_f64(c.re),
                fmt_f64(c.im),
            ]);
        }
    }
    rows
}
