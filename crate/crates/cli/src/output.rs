//! Report envelopes and their JSON and CSV renderings.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use normlab::Tolerances;

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Fixed-column table for the CSV rendering.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Table {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    seed: u64,
    tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix_seconds: Option<u64>,
    result: &'a Value,
}

/// SHA-256 of the canonical (key-sorted) JSON of `config`.
pub fn config_hash(config: &Value) -> String {
    let canonical = serde_json::to_string(config).expect("JSON value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub struct Emit<'a> {
    pub command: &'a str,
    pub config: &'a Value,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub timestamp: bool,
    pub format: Format,
    pub output: Option<&'a Path>,
}

impl Emit<'_> {
    pub fn render(&self, result: &Value, table: &Table) -> Result<Vec<u8>, Failure> {
        match self.format {
            Format::Json => {
                let env = Envelope {
                    schema_version: SCHEMA_VERSION,
                    tool: "normlab",
                    version: env!("CARGO_PKG_VERSION"),
                    command: self.command,
                    config_hash: config_hash(self.config),
                    seed: self.seed,
                    tolerances: self.tolerances,
                    generated_unix_seconds: self.timestamp.then(|| {
                        std::time::SystemTime::now()
                            .duration_since(std::time::UNIX_EPOCH)
                            .map(|d| d.as_secs())
                            .unwrap_or(0)
                    }),
                    result,
                };
                let mut out = serde_json::to_vec_pretty(&env).map_err(|e| Failure::io(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header).map_err(|e| Failure::io(e.to_string()))?;
                for r in &table.rows {
                    w.write_record(r).map_err(|e| Failure::io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| Failure::io(e.to_string()))
            }
        }
    }

    /// Writes the report to `--output` and the summary to stdout, or the
    /// report itself to stdout when no output path is given.
    pub fn write(&self, result: &Value, table: &Table, summary: &str) -> Result<(), Failure> {
        let bytes = self.render(result, table)?;
        match self.output {
            Some(path) => {
                std::fs::write(path, &bytes).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?;
                println!("{summary}");
            }
            None => {
                std::io::stdout().write_all(&bytes).map_err(|e| Failure::io(e.to_string()))?;
            }
        }
        Ok(())
    }
}
