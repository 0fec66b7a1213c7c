//! Byte-stable emission of tables and documents.
//!
//! CSV numbers use 17 significant digits in scientific notation, enough to
//! round-trip every `f64`; absent values are empty fields. JSON uses
//! `serde_json`'s shortest round-trip rendering, with non-finite numbers as
//! `null`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.16e}", x)
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Csv,
    Json,
}

/// One output file, fully rendered in memory.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub kind: Kind,
    pub bytes: Vec<u8>,
}

pub fn json<T: Serialize>(name: &str, value: &T) -> CliResult<Artifact> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Computation(format!("serializing {}: {}", name, e)))?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: format!("{}.json", name),
        kind: Kind::Json,
        bytes,
    })
}

/// CSV table with a fixed header.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn into_artifact(self, name: &str) -> CliResult<Artifact> {
        let fail = |e: csv::Error| CliError::Computation(format!("writing {}.csv: {}", name, e));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Computation(format!("writing {}.csv: {}", name, e)))?;
        Ok(Artifact {
            name: format!("{}.csv", name),
            kind: Kind::Csv,
            bytes,
        })
    }
}

/// Writes the artifacts selected by `format` into `dir`. Files are staged
/// under temporary names and renamed only once all of them are written, so
/// a failure leaves no partial output.
pub fn write_all(dir: &Path, artifacts: &[Artifact], format: Format) -> CliResult<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let selected: Vec<&Artifact> = artifacts
        .iter()
        .filter(|a| match a.kind {
            Kind::Csv => format.csv(),
            Kind::Json => format.json(),
        })
        .collect();
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    for a in &selected {
        let final_path = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.partial", a.name));
        if let Err(e) = fs::write(&tmp, &a.bytes) {
            let _ = fs::remove_file(&tmp);
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(io(&final_path)(e));
        }
        staged.push((tmp, final_path));
    }
    let mut written = Vec::new();
    for (tmp, final_path) in staged {
        fs::rename(&tmp, &final_path).map_err(io(&final_path))?;
        written.push(final_path);
    }
    Ok(written)
}
