//! Deterministic text outputs and the run directory.

use crate::error::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Files produced by a command, written only after it succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    /// Printed on stdout after the files are written.
    pub stdout: String,
}

impl Outputs {
    pub fn csv<const N: usize>(&mut self, name: &str, header: [&str; N], rows: impl IntoIterator<Item = [f64; N]>) {
        self.files.push((name.to_string(), csv_bytes(header, rows)));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.files.push((name.to_string(), json_bytes(value)));
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Creates `dir` and writes every file into it.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// CSV with a header row; floats in shortest round-trip form.
pub fn csv_bytes<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [f64; N]>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Pretty JSON with a trailing newline; struct fields keep declaration
/// order and maps are ordered.
pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serialisable value");
    v.push(b'\n');
    v
}

/// `<out>/<command>/<label>`, the label defaulting to a UTC timestamp.
pub fn run_dir(out: &Path, command: &str, label: Option<&str>) -> PathBuf {
    let label = match label {
        Some(l) => l.to_string(),
        None => chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string(),
    };
    out.join(command).join(label)
}
