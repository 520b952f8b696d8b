use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

fn real_text(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        serde_json::to_string(&v).unwrap_or_else(|_| format!("{v}"))
    }
}

/// A finite float as a JSON number; otherwise `"nan"`, `"inf"` or `"-inf"`.
pub fn real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(real_text(v))
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => real_text(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Missing => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => real(*v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::text).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(
                        self.columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Artifact sink for one run.
pub struct Output {
    dir: PathBuf,
    format: Format,
    artifacts: Vec<String>,
    inputs: Vec<FileDigest>,
}

impl Output {
    pub fn create(dir: &Path, format: Format) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            artifacts: Vec::new(),
            inputs: Vec::new(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Records a file written by someone else.
    pub fn register(&mut self, rel: &str) {
        if !self.artifacts.iter().any(|a| a == rel) {
            self.artifacts.push(rel.to_string());
        }
    }

    pub fn bytes(&mut self, rel: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Internal(format!("{}: {e}", parent.display())))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
        self.register(rel);
        Ok(())
    }

    pub fn json(&mut self, rel: &str, value: &Value) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        self.bytes(rel, format!("{text}\n").as_bytes())
    }

    /// Writes `stem.csv` or `stem.json` depending on the run's format.
    pub fn table(&mut self, stem: &str, table: &Table) -> CliResult<String> {
        let rel = match self.format {
            Format::Csv => format!("{stem}.csv"),
            Format::Json => format!("{stem}.json"),
        };
        match self.format {
            Format::Csv => self.bytes(&rel, table.csv().as_bytes())?,
            Format::Json => self.json(&rel, &table.json())?,
        }
        Ok(rel)
    }

    /// Reads a user-supplied file and records its digest.
    pub fn input(&mut self, path: &str) -> CliResult<PathBuf> {
        let p = PathBuf::from(path);
        let bytes = std::fs::read(&p).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
        if !self.inputs.iter().any(|d| d.path == path) {
            self.inputs.push(FileDigest {
                path: path.to_string(),
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(p)
    }

    pub fn finish(self, job: &Value) -> CliResult<Manifest> {
        let mut artifacts = self
            .artifacts
            .iter()
            .map(|rel| {
                Ok(FileDigest {
                    path: rel.clone(),
                    sha256: sha256_file(&self.dir.join(rel))?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: "edgechaos".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format: self.format,
            job: job.clone(),
            inputs: self.inputs,
            artifacts,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, format!("{text}\n")).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub format: Format,
    /// `{"command": …, "params": …}` with every parameter resolved.
    pub job: Value,
    pub inputs: Vec<FileDigest>,
    pub artifacts: Vec<FileDigest>,
}
