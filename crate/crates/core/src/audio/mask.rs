//! Selection of LLD frames that fall inside participant speech.

use crate::corpus::{LldFrameSeries, Speaker, TranscriptEntry};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticipantMask {
    pub selected: Vec<bool>,
    /// Merged participant intervals `[start, stop)` in seconds.
    pub segments: Vec<(f64, f64)>,
}

impl ParticipantMask {
    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }
}

/// Sorts and merges overlapping or touching half-open intervals.
pub fn merge_intervals(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.retain(|(a, b)| b > a);
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Selects frame `i` iff its centre `(i + 0.5)·period` lies in a participant turn.
pub fn participant_mask<T: Real>(
    transcript: &[TranscriptEntry],
    series: &LldFrameSeries<T>,
) -> Result<ParticipantMask> {
    if transcript.is_empty() {
        return Err(Error::invalid("transcript is empty"));
    }
    let segments = merge_intervals(
        transcript
            .iter()
            .filter(|e| e.speaker == Speaker::Participant)
            .map(|e| (e.start_time, e.stop_time))
            .collect(),
    );
    let mut selected = vec![false; series.frame_count()];
    let mut seg = 0;
    for (i, s) in selected.iter_mut().enumerate() {
        let t = series.frame_center(i);
        while seg < segments.len() && segments[seg].1 <= t {
            seg += 1;
        }
        if seg == segments.len() {
            break;
        }
        *s = segments[seg].0 <= t;
    }
    let mask = ParticipantMask { selected, segments };
    if mask.count() == 0 {
        return Err(Error::invalid("no LLD frames fall inside participant speech"));
    }
    Ok(mask)
}
