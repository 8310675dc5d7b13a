//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{ExpError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record written next to every run's outputs.
///
/// Holds no timestamps, so identical runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    /// Manifest for an effective (post-override) configuration.
    pub fn new<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Result<Self> {
        let value = serde_json::to_value(config).map_err(|e| ExpError::Config(e.to_string()))?;
        let canonical = serde_json::to_string(&value).map_err(|e| ExpError::Config(e.to_string()))?;
        Ok(Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            config_hash: sha256_hex(canonical.as_bytes()),
            config: value,
            outputs: Vec::new(),
        })
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        write_json(out_dir, "manifest.json", self)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))
}

/// Writes `rows` with a header taken from the row type's field order.
pub fn write_csv<R: Serialize>(out_dir: &Path, name: &str, rows: &[R]) -> Result<PathBuf> {
    ensure_dir(out_dir)?;
    let path = out_dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| ExpError::io(&path, e))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    ensure_dir(out_dir)?;
    let path = out_dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ExpError::Data(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| ExpError::io(&path, e))?;
    Ok(path)
}

/// Runs `f(0..count)` on `workers` threads; results keep index order.
pub fn run_indexed<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ExpError::Config(format!("worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Per-replication seed: `base + index` (wrapping).
pub fn replication_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Writes raw string records; the first record is the header.
pub fn write_records(out_dir: &Path, name: &str, records: &[Vec<String>]) -> Result<PathBuf> {
    ensure_dir(out_dir)?;
    let path = out_dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| ExpError::io(&path, e))?;
    Ok(path)
}
