//! CSV and JSON artefacts.
//!
//! CSV files hold only values derived from the config and seed, so reruns are
//! byte-identical. Wall-clock data goes to the JSON manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SFFCC_OUT_DIR";

/// Serialises one row per record with a header taken from the field names.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
}

pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv(rows, BufWriter::new(File::create(path)?))
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Provenance of one CLI run.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// SHA-256 of the normalised experiment config, when there is one.
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub started_unix: u64,
    pub elapsed_s: f64,
    /// Artefacts written, relative to the output directory.
    pub files: Vec<String>,
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(subcommand: &str, workers: usize) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config_hash: None,
            seed: None,
            workers,
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            elapsed_s: 0.0,
            files: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }
}

/// Output directory plus the list of files written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let p = self.root.join(name);
        write_csv_file(&p, rows)?;
        self.files.push(name.to_string());
        Ok(p)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let p = self.root.join(name);
        write_json_file(&p, value)?;
        self.files.push(name.to_string());
        Ok(p)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.root.join(name);
        std::fs::write(&p, body)?;
        self.files.push(name.to_string());
        Ok(p)
    }

    /// Writes `<stem>.manifest.json` listing everything written so far.
    pub fn finish(self, stem: &str, mut manifest: Manifest) -> Result<PathBuf> {
        manifest.files = self.files;
        let p = self.root.join(format!("{stem}.manifest.json"));
        write_json_file(&p, &manifest)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        x: f64,
    }

    #[test]
    fn csv_has_header_and_shortest_floats() {
        let s = csv_string(&[Row { a: 1, x: 0.06 }, Row { a: 2, x: 1e-4 }]).unwrap();
        assert_eq!(s, "a,x\n1,0.06\n2,0.0001\n");
    }

    #[test]
    fn output_dir_records_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("sub")).unwrap();
        out.csv("rows.csv", &[Row { a: 1, x: 0.5 }]).unwrap();
        let m = out.finish("run", Manifest::new("test", 1)).unwrap();
        let text = std::fs::read_to_string(m).unwrap();
        assert!(text.contains("rows.csv"));
    }
}
