//! Output directory bookkeeping: every emitted file is hashed and indexed
//! in the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, Source};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub aleph: f64,
    pub diverged: usize,
    pub total: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub wall_time_s: f64,
    pub config: &'a RunConfig,
    pub provenance: &'a BTreeMap<String, Source>,
    pub divergences: &'a [Divergence],
    pub failures: &'a [String],
    pub files: &'a [FileEntry],
}

pub struct Output {
    dir: PathBuf,
    pub files: Vec<FileEntry>,
    pub failures: Vec<String>,
    pub divergences: Vec<Divergence>,
}

/// Shortest round-trip text for a float, in exponent form outside
/// `[1e-4, 1e6)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), failures: Vec::new(), divergences: Vec::new() })
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), data)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(data), bytes: data.len() });
        log::info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let data = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.write(name, &data)
    }

    pub fn ndjson<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<(), CliError> {
        let mut data = Vec::new();
        for r in records {
            serde_json::to_writer(&mut data, r)?;
            data.push(b'\n');
        }
        self.write(name, &data)
    }

    pub fn fail(&mut self, what: String) {
        log::warn!("{what}");
        self.failures.push(what);
    }

    pub fn divergence(&mut self, aleph: f64, diverged: usize, total: usize) {
        self.divergences.push(Divergence { aleph, diverged, total });
    }

    /// Writes `manifest.json` (one JSON line) last, after all outputs.
    pub fn finish(
        &self,
        command: Vec<String>,
        wall_time_s: f64,
        config: &RunConfig,
        provenance: &BTreeMap<String, Source>,
    ) -> Result<(), CliError> {
        let m = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            wall_time_s,
            config,
            provenance,
            divergences: &self.divergences,
            failures: &self.failures,
            files: &self.files,
        };
        let mut data = serde_json::to_vec(&m)?;
        data.push(b'\n');
        std::fs::write(self.dir.join("manifest.json"), data)?;
        Ok(())
    }
}
