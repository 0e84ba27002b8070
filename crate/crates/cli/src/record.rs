//! Run records: a hashable `content` section, a free-form `meta` section, and
//! flat CSV sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_ID: &str = "hyperinit/run-record/v1";

/// Everything a run produces that must be reproducible bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Content {
    pub command: String,
    pub version: String,
    /// Resolved configuration without the worker count.
    pub config: Value,
    pub results: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub started_unix_seconds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub schema: String,
    pub content: Content,
    pub content_sha256: String,
    pub meta: Meta,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

/// A CSV sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner().context("flushing csv")?)?)
    }
}

/// Hex SHA-256 of the compact JSON encoding with object keys sorted.
pub fn content_hash(content: &Content) -> Result<String> {
    let bytes = serde_json::to_vec(&serde_json::to_value(content)?)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl RunRecord {
    pub fn new(content: Content, meta: Meta, tables: Vec<Table>) -> Result<Self> {
        Ok(Self {
            schema: SCHEMA_ID.into(),
            content_sha256: content_hash(&content)?,
            content,
            meta,
            tables,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `record.json` and one `<name>.csv` per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let path = dir.join("record.json");
        fs::write(&path, self.to_json()?).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}
