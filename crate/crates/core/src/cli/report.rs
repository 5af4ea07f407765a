use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::output::{Manifest, Outcome};
use crate::error::Result;

fn manifests_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    if dir.is_dir() {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("_manifest.json")) {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Merge the result tables of `run_dirs` into one table keyed by config hash.
///
/// Columns are the union in order of first appearance after a leading
/// `config_hash`. A hash seen earlier is skipped, so repeated runs of one
/// config contribute a single row set. Directories without a manifest are
/// skipped with a warning.
pub fn merge(run_dirs: &[PathBuf]) -> Result<Outcome> {
    let mut columns = vec!["config_hash".to_string()];
    let mut tables: Vec<(String, Vec<String>, Vec<Vec<String>>)> = Vec::new();
    let mut seen = HashSet::new();
    for dir in run_dirs {
        let manifests = manifests_in(dir)?;
        if manifests.is_empty() {
            log::warn!("no manifest in {}, skipping", dir.display());
            continue;
        }
        for m in manifests {
            let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(&m)?)?;
            if !seen.insert(manifest.config_hash.clone()) {
                continue;
            }
            let mut r = csv::Reader::from_path(dir.join(&manifest.results))?;
            let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
            for h in &header {
                if !columns.contains(h) {
                    columns.push(h.clone());
                }
            }
            let rows = r.records().map(|rec| Ok(rec?.iter().map(str::to_string).collect())).collect::<Result<_>>()?;
            tables.push((manifest.config_hash, header, rows));
        }
    }
    let mut out = Outcome::new(&[]);
    for (hash, header, rows) in tables {
        let pos: Vec<usize> = header.iter().map(|h| columns.iter().position(|c| c == h).unwrap()).collect();
        for r in rows {
            let mut full = vec![String::new(); columns.len()];
            full[0] = hash.clone();
            for (v, &p) in r.into_iter().zip(&pos) {
                full[p] = v;
            }
            out.rows.push(full);
        }
    }
    out.columns = columns;
    Ok(out)
}

/// Write the merged table to `output` and return its path.
pub fn report(run_dirs: &[PathBuf], output: &Path) -> Result<PathBuf> {
    let merged = merge(run_dirs)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    super::output::write_table(output, &merged.columns, &merged.rows)?;
    Ok(output.to_path_buf())
}
