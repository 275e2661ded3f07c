//! Atomic file output, CSV formatting and the run manifest.
//!
//! Floats in CSV files use Rust's shortest round-trip representation, so
//! identical inputs give byte-identical data files on one platform.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Write through a temporary sibling file and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numerical(format!("csv encoding: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Numerical(format!("csv encoding: {e}")))
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Numerical(format!("json encoding: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PointStatus {
    pub index: usize,
    pub status: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp_unix: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub points: Vec<PointStatus>,
    pub warnings: Vec<String>,
}

/// Collects output files for one run and writes the manifest last.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf(), files: Vec::new() }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        write_atomic(&path, bytes)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        points: Vec<PointStatus>,
        warnings: Vec<String>,
    ) -> CliResult<PathBuf> {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let manifest = RunManifest {
            tool: "cavelim",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            timestamp_unix,
            config,
            outputs: self.files,
            points,
            warnings,
        };
        let path = self.root.join(MANIFEST_NAME);
        write_atomic(&path, &json_bytes(&manifest)?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -0.49995000499950004, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn csv_quotes_messages() {
        let bytes = csv_bytes(&["a", "status"], &[vec!["1".into(), "error: x, y".into()]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,status\n1,\"error: x, y\"\n");
    }
}
