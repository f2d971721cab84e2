//! Result files: CSV tables with unit-bearing headers and a trailing
//! `config_digest` column, JSON documents with a run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub seed: u64,
    pub version: String,
    pub command: String,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

/// One CSV table, rows already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, digest: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(&self.name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(self.header.iter().copied().chain(["config_digest"]))?;
        for row in &self.rows {
            w.write_record(row.iter().map(String::as_str).chain([digest]))?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Wall-clock budget for simulation work. Exceeding it is an error, so a
/// run either completes or produces no results.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    start: Instant,
    max_seconds: Option<f64>,
}

impl Budget {
    pub fn new(max_seconds: Option<f64>) -> Self {
        Self { start: Instant::now(), max_seconds }
    }

    pub fn check(&self, stage: &str) -> Result<(), CliError> {
        match self.max_seconds {
            Some(max) if self.start.elapsed().as_secs_f64() > max => {
                Err(CliError::Resource(format!("simulation time budget of {max} s exceeded during {stage}")))
            }
            _ => Ok(()),
        }
    }
}
