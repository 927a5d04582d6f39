//! CSV / JSON stage artifacts.

use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::corpus::{data_lines, read_text, write_text, FeatureVector};
use crate::error::{Error, Result};

pub const ARTIFACT_FORMAT_VERSION: u32 = 1;

/// First line of every CSV artifact.
pub fn csv_preamble(seed: u64, stage: &str) -> String {
    format!("# format_version={ARTIFACT_FORMAT_VERSION} seed={seed} stage={stage}\n")
}

/// Per-session feature rows sharing one header.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub names: Vec<String>,
    /// `sessions × features`.
    pub values: Array2<f64>,
}

impl FeatureTable {
    /// Builds a table from per-session vectors, which must share names and order.
    pub fn from_vectors(rows: Vec<(String, FeatureVector<f64>)>) -> Result<Self> {
        let names = rows
            .first()
            .map(|(_, v)| v.names.clone())
            .ok_or_else(|| Error::invalid("feature table has no sessions"))?;
        let mut values = Array2::zeros((rows.len(), names.len()));
        let mut ids = Vec::with_capacity(rows.len());
        for (r, (id, v)) in rows.into_iter().enumerate() {
            if v.names != names {
                return Err(Error::invalid(format!(
                    "session {id} has a different feature layout"
                )));
            }
            values.row_mut(r).assign(&ArrayView1::from(&v.values));
            ids.push(id);
        }
        Ok(Self { ids, names, values })
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id)
    }

    pub fn select(&self, ids: &[&str]) -> Result<Array2<f64>> {
        let idx = ids
            .iter()
            .map(|id| {
                self.row_index(id)
                    .ok_or_else(|| Error::invalid(format!("session {id} missing from feature table")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.values.select(ndarray::Axis(0), &idx))
    }

    pub fn to_csv(&self, preamble: &str) -> String {
        let mut out = String::from(preamble);
        out.push_str("session_id");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(self.values.outer_iter()) {
            out.push_str(id);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path, preamble: &str) -> Result<()> {
        write_text(path, &self.to_csv(preamble))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut lines = data_lines(&text);
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty feature table"))?;
        let mut cols = header.split(',');
        if cols.next() != Some("session_id") {
            return Err(Error::parse(path, 1, "first column must be session_id"));
        }
        let names: Vec<String> = cols.map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut flat = Vec::new();
        for (row, line) in lines {
            let mut fields = line.split(',');
            let id = fields.next().unwrap_or_default().to_string();
            let before = flat.len();
            for f in fields {
                flat.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(path, row, format!("bad value {f:?}")))?,
                );
            }
            if flat.len() - before != names.len() {
                return Err(Error::parse(
                    path,
                    row,
                    format!("expected {} values, found {}", names.len(), flat.len() - before),
                ));
            }
            ids.push(id);
        }
        let values = Array2::from_shape_vec((ids.len(), names.len()), flat)
            .map_err(|e| Error::parse(path, 0, e.to_string()))?;
        Ok(Self { ids, names, values })
    }
}

pub fn write_json<D: Serialize>(path: &Path, doc: &D) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|source| Error::Document {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

/// Single-line JSON, for documents dominated by large numeric arrays.
pub fn write_json_compact<D: Serialize>(path: &Path, doc: &D) -> Result<()> {
    let mut text = serde_json::to_string(doc).map_err(|source| Error::Document {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Document {
        path: path.to_path_buf(),
        source,
    })
}
