//! Output files: CSV with `#` metadata, the run manifest, and atomic writes.
//!
//! Every file of a run is rendered in memory first and only then written,
//! each through a temporary sibling and a rename, so a failed run leaves no
//! partial outputs behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::error::CliError;

pub const TOOL: &str = "casimirbind";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.json";

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// An output file rendered in memory.
pub struct Rendered {
    pub name: String,
    pub body: String,
    /// Data rows, excluding comments and the header.
    pub rows: usize,
}

pub struct CsvBuilder {
    text: String,
    rows: usize,
}

impl CsvBuilder {
    pub fn new(command: &str, config: &RunConfig, timestamp: &str, header: &str) -> Self {
        let mut text = String::new();
        text.push_str(&format!("# tool: {TOOL} {VERSION}\n"));
        text.push_str(&format!("# command: {command}\n"));
        text.push_str(&format!("# config_sha256: {}\n", config.hash()));
        text.push_str(&format!("# timestamp: {timestamp}\n"));
        text.push_str(header);
        text.push('\n');
        Self { text, rows: 0 }
    }

    /// Appends a row; every value must be finite.
    pub fn row(&mut self, values: &[f64], extra: Option<&str>) -> Result<(), CliError> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Numerical(format!("non-finite output value {v}")));
        }
        let mut line = values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",");
        if let Some(e) = extra {
            line.push(',');
            line.push_str(e);
        }
        self.text.push_str(&line);
        self.text.push('\n');
        self.rows += 1;
        Ok(())
    }

    pub fn finish(self, name: &str) -> Rendered {
        Rendered {
            name: name.to_string(),
            body: self.text,
            rows: self.rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub timestamp: String,
    pub config: RunConfig,
    pub config_hash: String,
    pub threads: usize,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256(text: &str) -> String {
    hex(&Sha256::digest(text.as_bytes()))
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Writes all rendered files and then the manifest describing them.
pub fn write_run(
    out: &Path,
    command: &str,
    config: &RunConfig,
    timestamp: &str,
    threads: usize,
    files: Vec<Rendered>,
) -> Result<RunManifest, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: command.into(),
        timestamp: timestamp.into(),
        config: config.clone(),
        config_hash: config.hash(),
        threads,
        outputs: files
            .iter()
            .map(|f| OutputEntry {
                file: f.name.clone(),
                sha256: sha256(&f.body),
                rows: f.rows,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    for f in &files {
        write_atomic(&out.join(&f.name), &f.body)?;
    }
    write_atomic(&out.join(MANIFEST), &json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn rejects_non_finite_rows() {
        let cfg = crate::config::preset("fig3a").unwrap();
        let mut b = CsvBuilder::new("potential", &cfg, "t", "a,b");
        assert!(b.row(&[1.0, 2.0], None).is_ok());
        assert_eq!(b.row(&[f64::NAN, 2.0], None).unwrap_err().exit_code(), 3);
        assert_eq!(b.finish("x.csv").rows, 1);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
