//! Per-modality predicted totals keyed by session id.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::corpus::{data_lines, read_text, write_text};
use crate::error::{Error, Result};

pub const SCORE_MAX: f64 = 24.0;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet {
    pub modality: String,
    pub scores: BTreeMap<String, f64>,
}

impl PredictionSet {
    pub fn new(modality: impl Into<String>, scores: BTreeMap<String, f64>) -> Result<Self> {
        let modality = modality.into();
        if let Some((id, v)) = scores
            .iter()
            .find(|(_, v)| !(v.is_finite() && (0.0..=SCORE_MAX).contains(*v)))
        {
            return Err(Error::invalid(format!(
                "{modality}: score {v} for session {id} outside [0, 24]"
            )));
        }
        Ok(Self { modality, scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.scores.keys().map(String::as_str).collect()
    }

    /// Keeps only the listed sessions.
    pub fn restrict(&self, ids: &BTreeSet<&str>) -> Self {
        Self {
            modality: self.modality.clone(),
            scores: self
                .scores
                .iter()
                .filter(|(k, _)| ids.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// `session_id,score` rows after any `#` comment lines in `preamble`.
    pub fn to_csv(&self, preamble: &str) -> String {
        let mut out = String::from(preamble);
        out.push_str("session_id,score\n");
        for (id, v) in &self.scores {
            out.push_str(&format!("{id},{v}\n"));
        }
        out
    }

    pub fn write(&self, path: &Path, preamble: &str) -> Result<()> {
        write_text(path, &self.to_csv(preamble))
    }

    pub fn read(path: &Path, modality: impl Into<String>) -> Result<Self> {
        let text = read_text(path)?;
        let mut scores = BTreeMap::new();
        for (row, line) in data_lines(&text) {
            let (id, v) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(path, row, "expected session_id,score"))?;
            let (id, v) = (id.trim(), v.trim());
            if id == "session_id" {
                continue;
            }
            let v: f64 = v
                .parse()
                .map_err(|_| Error::parse(path, row, format!("bad score {v:?}")))?;
            if scores.insert(id.to_string(), v).is_some() {
                return Err(Error::parse(path, row, format!("duplicate session {id}")));
            }
        }
        Self::new(modality, scores)
    }
}

/// Errors with the symmetric difference unless both id sets are equal.
pub fn check_same_sessions<'a>(
    left: impl IntoIterator<Item = &'a str>,
    right: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    let l: BTreeSet<&str> = left.into_iter().collect();
    let r: BTreeSet<&str> = right.into_iter().collect();
    if l == r {
        return Ok(());
    }
    Err(Error::SessionMismatch {
        only_left: l.difference(&r).map(|s| s.to_string()).collect(),
        only_right: r.difference(&l).map(|s| s.to_string()).collect(),
    })
}
