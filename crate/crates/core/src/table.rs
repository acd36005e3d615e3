//! Numeric CSV tables with `#`-prefixed metadata lines.
//!
//! ```text
//! # schema: densitylab.profile
//! # schema_version: 1
//! # entry: euclidean_catenoid
//! s,theta,...,tol
//! 1.0500000000000000e0,...
//! ```
//!
//! Values are written with 17 significant digits so that reading a table
//! back reproduces every `f64` bit for bit.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Round-trip formatting of a float.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require_meta(&self, key: &str) -> Result<&str> {
        self.get_meta(key)
            .ok_or_else(|| Error::Parse(format!("table is missing the '{key}' metadata line")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("table has no column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format_f64(*x))).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_string_lossless(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("table output is ASCII")
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
            } else if !line.trim().is_empty() {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?;
            let row = rec
                .iter()
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {}: bad number '{t}'", i + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    i + 1,
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        Ok(CsvTable { metadata, columns, rows })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::read(std::io::BufReader::new(file))
    }
}
