//! Blink counting from the area of the left-eye landmark polygon.

use rand::seq::index::sample;

use crate::corpus::{mode, FeatureVector, LandmarkFrame};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::rng;

/// Left-eye contour, 1-based.
pub const EYE_POLYGON: [usize; 6] = [37, 38, 39, 40, 41, 42];

/// A frame is part of a blink when its eye area drops below this fraction of the open area.
pub const BLINK_AREA_RATIO: f64 = 0.9;

pub const DEFAULT_CLOSED_SAMPLE: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlinkFeatures<T> {
    pub blink_count: usize,
    /// Blinks per second.
    pub blink_frequency: T,
    pub open_area: T,
    pub closed_area: T,
}

impl<T: Real> BlinkFeatures<T> {
    pub fn to_feature_vector(&self) -> FeatureVector<T> {
        let mut v = FeatureVector::new();
        v.push("blink_count", T::from_usize_lossy(self.blink_count));
        v.push("blink_frequency", self.blink_frequency);
        v.push("eye_open_area", self.open_area);
        v.push("eye_closed_area", self.closed_area);
        v
    }
}

/// Absolute shoelace area of the left-eye polygon.
pub fn eye_area<T: Real>(frame: &LandmarkFrame<T>) -> T {
    let pts = EYE_POLYGON.map(|i| frame.point(i));
    let mut twice = T::zero();
    for (i, p) in pts.iter().enumerate() {
        let q = pts[(i + 1) % pts.len()];
        twice += p.x * q.y - q.x * p.y;
    }
    (twice / T::lit(2.0)).abs()
}

/// Number of maximal runs of consecutive values strictly below `threshold`.
pub fn count_blinks<T: Real>(areas: &[T], threshold: T) -> usize {
    let mut count = 0;
    let mut inside = false;
    for &a in areas {
        let below = a < threshold;
        if below && !inside {
            count += 1;
        }
        inside = below;
    }
    count
}

/// Blink statistics from a per-frame eye-area trace.
///
/// The open-eye area is the mode of the trace; the closed-eye area is the minimum
/// over a seeded sample of `min(sample_count, len)` distinct frames.
pub fn blink_features_from_areas<T: Real>(
    areas: &[T],
    duration: T,
    sample_count: usize,
    seed: u64,
) -> Result<BlinkFeatures<T>> {
    if areas.is_empty() {
        return Err(Error::invalid("blink detection needs at least one valid frame"));
    }
    if !(duration > T::zero()) {
        return Err(Error::invalid("session duration must be positive"));
    }
    let open_area = mode(areas)?;
    if !(open_area > T::zero()) {
        return Err(Error::invalid("open-eye area is zero"));
    }
    let picks = sample(&mut rng(seed), areas.len(), sample_count.min(areas.len()));
    let sampled_min = picks
        .iter()
        .map(|i| areas[i])
        .fold(T::infinity(), T::min);
    let blink_count = count_blinks(areas, open_area * T::lit(BLINK_AREA_RATIO));
    Ok(BlinkFeatures {
        blink_count,
        blink_frequency: T::from_usize_lossy(blink_count) / duration,
        open_area,
        closed_area: sampled_min.min(open_area),
    })
}

/// Blink statistics for a session's landmark frames; invalid frames are skipped.
pub fn blink_features<T: Real>(
    frames: &[LandmarkFrame<T>],
    duration: T,
    sample_count: usize,
    seed: u64,
) -> Result<BlinkFeatures<T>> {
    let areas: Vec<T> = frames.iter().filter(|f| f.valid).map(eye_area).collect();
    blink_features_from_areas(&areas, duration, sample_count, seed)
}
