//! Deterministic CSV and manifest emission. Fixed dialect: comma separator,
//! `.` decimal point via Rust's shortest-round-trip float formatting, header
//! row, LF line endings.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct OutputFile {
    pub name: String,
    pub rows: usize,
    pub content: String,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Builds one CSV from a header and preformatted rows.
pub fn csv_file(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> OutputFile {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    wtr.write_record(header).expect("header");
    let n = rows.len();
    for row in rows {
        wtr.write_record(&row).expect("row");
    }
    let bytes = wtr.into_inner().expect("flush");
    OutputFile {
        name: name.to_string(),
        rows: n,
        content: String::from_utf8(bytes).expect("utf8 csv"),
    }
}

/// Two-column plot data; the y header names the statement probed.
pub fn plot_file(name: &str, x_header: &str, y_header: &str, points: &[(f64, f64)]) -> OutputFile {
    csv_file(
        name,
        &[x_header, y_header],
        points
            .iter()
            .map(|&(x, y)| vec![fmt_f64(x), fmt_f64(y)])
            .collect(),
    )
}

#[derive(Debug, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub anchor: String,
    pub code_version: String,
    pub wall_ms: u128,
    pub threads: usize,
    pub resolved_config: crate::config::ExperimentConfig,
    pub summary: serde_json::Value,
    pub files: Vec<ManifestFile>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn write_outputs(
    dir: &Path,
    files: &[OutputFile],
    manifest: &Manifest,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output dir {}", dir.display()))?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.content)
            .with_context(|| format!("writing {}", f.name))?;
    }
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(())
}
