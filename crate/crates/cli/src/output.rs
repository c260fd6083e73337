//! Atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::run::Row;

pub const COLUMNS: [&str; 7] = ["sweep_value", "metric", "variant", "value", "err", "trials", "receiver"];

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    );
    tmp.set_file_name(name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

// shortest round-trip form, switching to exponent notation for tiny values
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv_bytes(rows: &[Row]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            num(r.sweep_value),
            r.metric.to_string(),
            r.variant.to_string(),
            num(r.value),
            num(r.err),
            r.trials.to_string(),
            r.receiver.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub created_unix: u64,
    pub sweep_variable: &'static str,
    pub sweep_points: usize,
    pub copula: CopulaInfo,
    pub mc: McInfo,
    pub dor_variant: String,
    pub interference_policy: String,
    pub cases: Vec<CaseInfo>,
}

#[derive(Debug, Serialize)]
pub struct CopulaInfo {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub floor: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct McInfo {
    pub trials: u64,
    pub seed: u64,
    pub chunk: u64,
    pub sampler: String,
}

#[derive(Debug, Serialize)]
pub struct CaseInfo {
    pub label: Option<String>,
    pub file: String,
    pub ports: [[usize; 2]; 2],
    pub jitter: [f64; 2],
    pub weak_interference_trials: u64,
}
