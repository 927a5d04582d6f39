use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of landmarks in the iBUG-68 scheme.
pub const LANDMARK_COUNT: usize = 68;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn cast<U: Real>(&self) -> Point<U> {
        Point::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

/// One video frame of 2-D facial landmarks.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkFrame<T> {
    pub frame_index: u64,
    pub timestamp: T,
    pub confidence: T,
    pub valid: bool,
    pub points: [Point<T>; LANDMARK_COUNT],
}

impl<T: Real> LandmarkFrame<T> {
    /// Landmark by its 1-based iBUG index.
    #[inline]
    pub fn point(&self, index: usize) -> Point<T> {
        self.points[index - 1]
    }

    pub fn cast<U: Real>(&self) -> LandmarkFrame<U> {
        LandmarkFrame {
            frame_index: self.frame_index,
            timestamp: U::lit(self.timestamp.as_f64()),
            confidence: U::lit(self.confidence.as_f64()),
            valid: self.valid,
            points: self.points.map(|p| p.cast()),
        }
    }
}

/// Frames in file order with invalid ones removed.
pub fn valid_frames<T: Real>(frames: &[LandmarkFrame<T>]) -> Vec<&LandmarkFrame<T>> {
    frames.iter().filter(|f| f.valid).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Speaker {
    Participant,
    Interviewer,
}

impl Speaker {
    /// `"participant"` (any case) is the participant; every other label is the interviewer.
    pub fn from_label(label: &str) -> Self {
        if label.trim().eq_ignore_ascii_case("participant") {
            Speaker::Participant
        } else {
            Speaker::Interviewer
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptEntry {
    pub start_time: f64,
    pub stop_time: f64,
    pub speaker: Speaker,
    pub tokens: Vec<String>,
}

impl TranscriptEntry {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Per-frame low-level acoustic descriptors, stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LldFrameSeries<T> {
    pub frame_period: f64,
    pub channels: Vec<String>,
    /// `values[c][i]` is channel `c` at frame `i`.
    pub values: Vec<Vec<T>>,
    pub voiced: Vec<bool>,
}

impl<T: Real> LldFrameSeries<T> {
    pub fn new(
        frame_period: f64,
        channels: Vec<String>,
        values: Vec<Vec<T>>,
        voiced: Option<Vec<bool>>,
    ) -> Result<Self> {
        if !(frame_period > 0.0) {
            return Err(Error::invalid(format!(
                "frame period must be positive, got {frame_period}"
            )));
        }
        if channels.len() != values.len() {
            return Err(Error::invalid("channel names and value columns disagree"));
        }
        let n = values.first().map_or(0, Vec::len);
        if values.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("LLD channels have unequal lengths"));
        }
        let voiced = voiced.unwrap_or_else(|| vec![true; n]);
        if voiced.len() != n {
            return Err(Error::invalid("voicing flags do not match frame count"));
        }
        Ok(Self {
            frame_period,
            channels,
            values,
            voiced,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.voiced.len()
    }

    /// Covered time in seconds.
    pub fn span(&self) -> f64 {
        self.frame_count() as f64 * self.frame_period
    }

    /// Center time of frame `i`.
    pub fn frame_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.frame_period
    }
}

/// Named per-frame channels such as AU intensities, gaze angles and pose.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix<T> {
    pub names: Vec<String>,
    pub columns: Vec<Vec<T>>,
}

/// PHQ-8 item order.
pub const PHQ8_ITEMS: [&str; 8] = [
    "NoInterest",
    "Depressed",
    "Sleep",
    "Tired",
    "Appetite",
    "Failure",
    "Concentrating",
    "Moving",
];

/// Conventional PHQ-8 cut-off for the binary flag when a file omits it.
pub const PHQ8_BINARY_CUTOFF: u8 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phq8Labels {
    items: [u8; 8],
    binary: bool,
}

impl Phq8Labels {
    pub fn new(items: [u8; 8]) -> Result<Self> {
        let total: u8 = validate_items(&items)?;
        Ok(Self {
            items,
            binary: total >= PHQ8_BINARY_CUTOFF,
        })
    }

    pub fn with_binary(items: [u8; 8], binary: bool) -> Result<Self> {
        validate_items(&items)?;
        Ok(Self { items, binary })
    }

    pub fn items(&self) -> [u8; 8] {
        self.items
    }

    pub fn total(&self) -> u8 {
        self.items.iter().sum()
    }

    pub fn binary(&self) -> bool {
        self.binary
    }
}

fn validate_items(items: &[u8; 8]) -> Result<u8> {
    if let Some((i, v)) = items.iter().enumerate().find(|(_, &v)| v > 3) {
        return Err(Error::invalid(format!(
            "PHQ-8 item {} ({}) is {v}, expected 0..=3",
            i + 1,
            PHQ8_ITEMS[i]
        )));
    }
    Ok(items.iter().sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

/// One interview session and the files that describe it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub session_id: String,
    pub duration: f64,
    pub landmarks: PathBuf,
    /// AU / gaze / pose channel file.
    pub features: PathBuf,
    pub lld: PathBuf,
    pub transcript: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    pub split: Split,
}

/// Ordered, named feature values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector<T> {
    pub names: Vec<String>,
    pub values: Vec<T>,
}

impl<T: Copy> FeatureVector<T> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: T) {
        self.names.push(name.into());
        self.values.push(value);
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: FeatureVector<T>) {
        for (n, v) in other.names.into_iter().zip(other.values) {
            self.push(format!("{prefix}_{n}"), v);
        }
    }

    pub fn append(&mut self, other: FeatureVector<T>) {
        self.names.extend(other.names);
        self.values.extend(other.values);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_total_is_item_sum() {
        let l = Phq8Labels::new([2, 1, 3, 0, 2, 1, 0, 1]).unwrap();
        assert_eq!(l.total(), 10);
        assert!(l.binary());
    }

    #[test]
    fn labels_reject_out_of_range_item() {
        assert!(Phq8Labels::new([0, 0, 4, 0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn speaker_mapping_is_case_insensitive() {
        assert_eq!(Speaker::from_label("PARTICIPANT"), Speaker::Participant);
        assert_eq!(Speaker::from_label("Ellie"), Speaker::Interviewer);
    }

    #[test]
    fn lld_span_counts_frames() {
        let s = LldFrameSeries::<f64>::new(0.01, vec!["a".into()], vec![vec![0.0; 6000]], None)
            .unwrap();
        assert!((s.span() - 60.0).abs() < 1e-9);
        assert!(LldFrameSeries::<f64>::new(0.0, vec![], vec![], None).is_err());
    }
}
