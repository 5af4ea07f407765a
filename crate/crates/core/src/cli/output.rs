use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gp::WaveFunction;
use crate::snapshot::{write_csv, Snapshot};

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Extra file produced by an experiment.
#[derive(Debug, Clone)]
pub enum Artifact {
    WaveCsv(WaveFunction),
    Binary(Snapshot),
}

/// Everything an experiment produces, held in memory until it succeeds.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub artifacts: Vec<(String, Artifact)>,
    pub mode: Option<&'static str>,
}

impl Outcome {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), artifacts: Vec::new(), mode: None }
    }

    pub fn row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn artifact(&mut self, name: String, a: Artifact) {
        self.artifacts.push((name, a));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config_hash: String,
    pub results: String,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
}

pub fn manifest_path(dir: &Path, prefix: &str) -> PathBuf {
    dir.join(format!("{prefix}_manifest.json"))
}

pub fn write_table(path: &Path, columns: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write results, artifacts and the manifest under `dir`.
pub fn write_outcome(dir: &Path, prefix: &str, outcome: &Outcome, mut manifest: Manifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let results = format!("{prefix}_results.csv");
    write_table(&dir.join(&results), &outcome.columns, &outcome.rows)?;
    let mut files = Vec::new();
    for (name, art) in &outcome.artifacts {
        let file = format!("{prefix}_{name}");
        let path = dir.join(&file);
        match art {
            Artifact::WaveCsv(phi) => write_csv(phi, &path)?,
            Artifact::Binary(s) => s.write(&path)?,
        }
        files.push(file);
    }
    manifest.results = results;
    manifest.files = files;
    manifest.mode = outcome.mode.map(str::to_string);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(manifest_path(dir, prefix), text + "\n")?;
    Ok(())
}
