use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

/// Record of one CLI invocation, written after all its artifacts.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output_dir: String,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            config_path: None,
            seed: None,
            output_dir: output_dir.display().to_string(),
            artifacts: Vec::new(),
            wall_clock_seconds: 0.0,
            threads: crate::current_threads(),
        }
    }

    /// Writes an artifact and records it.
    pub fn artifact(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(mut self, path: &Path, elapsed: Duration) -> Result<()> {
        self.wall_clock_seconds = elapsed.as_secs_f64();
        self.artifacts.retain(|a| Path::new(a).exists());
        let text = serde_json::to_string_pretty(&self)? + "\n";
        write_atomic(path, text.as_bytes())
    }
}

/// `<stem>.manifest.json` next to a single-file output.
pub fn manifest_beside(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}

/// Two-column CSV with full-precision floats.
pub fn xy_csv(header: [&str; 2], rows: &[(f64, f64)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for (x, y) in rows {
        w.write_record([distortsec::harness::fmt_f64(*x), distortsec::harness::fmt_f64(*y)])?;
    }
    Ok(w.into_inner()?)
}
