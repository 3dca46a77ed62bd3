use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{io, CliError, Result};

/// One CSV/JSON cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
}

impl Value {
    /// Floats carry 17 significant digits so payload diffs are exact.
    pub fn to_csv(self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format!("{x:.16e}"),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(i) => i as f64,
            Value::Float(x) => x,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let ser = |e: csv::Error| CliError::Serialize(e.to_string());
        w.write_record(&self.columns).map_err(ser)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_csv())).map_err(ser)?;
        }
        w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub version: String,
    pub elapsed_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub warnings: Vec<String>,
    /// module-specific summaries
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl Diagnostics {
    pub fn detail(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Serialize(e.to_string()))?;
        self.details.insert(key.to_string(), v);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub config: RunConfig,
    pub payload: Table,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    diagnostics: &'a Diagnostics,
}

/// Files written for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub payload: PathBuf,
    pub meta: Option<PathBuf>,
}

fn to_json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir.to_path_buf()))?;
    tmp.write_all(bytes).map_err(io(path.to_path_buf()))?;
    tmp.as_file().sync_all().map_err(io(path.to_path_buf()))?;
    tmp.persist(path).map_err(|e| io(path)(e.error))?;
    Ok(())
}

impl ResultRecord {
    pub fn file_stem(&self) -> &'static str {
        self.config.subcommand.map_or("run", |s| s.name())
    }

    /// CSV gets a `.meta.json` sidecar holding the config echo and diagnostics.
    pub fn write(&self, dir: &Path) -> Result<Written> {
        let stem = self.file_stem();
        match self.config.format {
            Format::Csv => {
                let payload = dir.join(format!("{stem}.csv"));
                let meta = dir.join(format!("{stem}.meta.json"));
                write_atomic(&payload, &self.payload.to_csv()?)?;
                write_atomic(&meta, &to_json(&Sidecar { config: &self.config, diagnostics: &self.diagnostics })?)?;
                Ok(Written { payload, meta: Some(meta) })
            }
            Format::Json => {
                let payload = dir.join(format!("{stem}.json"));
                write_atomic(&payload, &to_json(self)?)?;
                Ok(Written { payload, meta: None })
            }
        }
    }
}
