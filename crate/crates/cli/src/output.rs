//! Output plumbing: CSV files with a JSON manifest sidecar, and stdout reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything needed to rerun a command and get the same bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Full command line, replayable with `mlurn replay`.
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// SHA-256 of the profile input (file bytes or built-in profile text).
    pub input_digest: Option<String>,
    pub output_digest: Option<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Context shared by every command: identifies the run in manifests.
pub struct RunContext {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub input_digest: Option<String>,
    pub started: f64,
    pub json: bool,
}

impl RunContext {
    fn manifest(&self, output_digest: Option<String>) -> RunManifest {
        RunManifest {
            tool: "mlurn".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand.clone(),
            argv: self.argv.clone(),
            config: self.config.clone(),
            seed: self.seed,
            input_digest: self.input_digest.clone(),
            output_digest,
            started_unix: self.started,
            finished_unix: now_unix(),
        }
    }

    /// Writes `bytes` to `path` and its manifest to `path.manifest.json`.
    pub fn write_artifact(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let manifest = self.manifest(Some(sha256_hex(bytes)));
        let sidecar = manifest_path(path);
        fs::write(&sidecar, serde_json::to_vec_pretty(&manifest)?)
            .with_context(|| format!("writing {}", sidecar.display()))?;
        Ok(())
    }

    /// Prints a report: pretty JSON (with the manifest) under `--json`, else the text.
    pub fn emit<T: Serialize>(&self, report: &T, text: impl FnOnce() -> String) -> Result<()> {
        if self.json {
            let value = serde_json::json!({ "manifest": self.manifest(None), "result": report });
            println!("{}", serde_json::to_string_pretty(&value)?);
        } else {
            print!("{}", text());
        }
        Ok(())
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// CSV bytes from a header and rows of already formatted fields.
pub fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV: {e}"))
}

pub fn numbered(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |i| format!("{prefix}{i}"))
}

/// Shortest round-trip form, switching to exponent notation for tiny values.
pub fn fnum(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", items.join(", "))
}
