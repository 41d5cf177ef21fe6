//! Output directory with digests and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use berw_core::rng::RNG_ALGORITHM;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

pub struct OutDir {
    dir: PathBuf,
    files: Vec<(String, String, u64)>,
    started: Instant,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Shortest round-trip rendering; identical across runs.
pub fn num(x: f64) -> String {
    format!("{x}")
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        let digest = hex::encode(Sha256::digest(bytes));
        self.files.push((name.to_string(), digest, bytes.len() as u64));
        Ok(())
    }

    /// Comma-separated, header row first, LF line endings.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let internal = |e: csv::Error| CliError::Internal(e.to_string());
        w.write_record(header).map_err(internal)?;
        for r in rows {
            debug_assert_eq!(r.len(), header.len());
            w.write_record(r).map_err(internal)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes the manifest; data files must all be written before this.
    pub fn finish(self, subcommand: &str, params: BTreeMap<String, String>, seed: u64) -> Result<(), CliError> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(name, sha, bytes)| json!({"name": name, "sha256": sha, "bytes": bytes}))
            .collect();
        let manifest = json!({
            "toolkit": "berw",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "parameters": params,
            "rng": RNG_ALGORITHM,
            "seed": seed,
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
            "host": {
                "os": std::env::consts::OS,
                "arch": std::env::consts::ARCH,
                "threads": rayon::current_num_threads(),
            },
            "files": files,
        });
        let path = self.dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
    }
}
