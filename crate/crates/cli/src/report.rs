//! Output sink, manifests and failure reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use polariton_core::io::{write_json, Table};
use polariton_core::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Config,
    Numerical,
}

/// A failed run, classified by exit code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub exit_code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Config, exit_code: EXIT_CONFIG, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Numerical, exit_code: EXIT_NUMERIC, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::config(e.to_string())
        } else {
            Failure::numerical(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Scalar results of a scenario, keyed by name. `NaN` marks "not available"
/// and serialises as `null`.
pub type Summary = BTreeMap<String, f64>;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub config_sha256: String,
    pub config: Value,
    pub status: Status,
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bunching_metric: Option<f64>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Failure>,
}

impl Manifest {
    pub fn new(scenario: String, config: Value) -> Self {
        Manifest {
            tool: "polariton",
            version: env!("CARGO_PKG_VERSION"),
            scenario,
            config_sha256: config_hash(&config),
            config,
            status: Status::Running,
            files: Vec::new(),
            bunching_metric: None,
            summary: Summary::new(),
            error: None,
        }
    }
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form.
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(config).expect("JSON values serialise")))
}

pub fn file_entry(root: &Path, rel: &str) -> Result<FileEntry, Failure> {
    let bytes = fs::read(root.join(rel)).map_err(|e| Failure::numerical(format!("{rel}: {e}")))?;
    Ok(FileEntry { path: rel.to_string(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

/// Collects the files a scenario writes below one directory.
pub struct Sink {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path) -> Self {
        Sink { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), Failure> {
        table.write_csv(&self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        write_json(&self.dir.join(name), value)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn write_manifest<T: Serialize>(dir: &Path, manifest: &T) -> Result<(), Failure> {
    write_json(&dir.join("manifest.json"), manifest).map_err(|e| Failure::numerical(format!("manifest: {e}")))
}

/// Removes the files listed by a previous manifest in `dir`, so that a rerun
/// leaves no stale outputs behind. Nothing else in the directory is touched.
pub fn clear_previous(dir: &Path) {
    let Ok(text) = fs::read_to_string(dir.join("manifest.json")) else { return };
    let Ok(old) = serde_json::from_str::<Value>(&text) else { return };
    if let Some(files) = old.get("files").and_then(Value::as_array) {
        for f in files {
            if let Some(p) = f.get("path").and_then(Value::as_str) {
                if !p.contains("..") && !Path::new(p).is_absolute() {
                    let _ = fs::remove_file(dir.join(p));
                }
            }
        }
    }
}

/// One-line machine-readable report on stderr.
pub fn print_failure(failure: &Failure) {
    let line = serde_json::json!({
        "status": "failed",
        "kind": failure.kind,
        "exit_code": failure.exit_code,
        "error": failure.message,
    });
    eprintln!("{line}");
}
