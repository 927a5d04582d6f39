//! Per-frame distances between facial regions, after alignment to a reference face.

use ndarray::Array2;

use super::align::fit_affine;
use crate::corpus::{LandmarkFrame, Point, LANDMARK_COUNT};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const REGION_NAMES: [&str; 10] = [
    "left_eye_h",
    "left_eye_v",
    "right_eye_h",
    "right_eye_v",
    "mouth_h",
    "mouth_v",
    "head_h",
    "head_v",
    "brow_h",
    "brow_v",
];

/// Landmark pairs (1-based) per region; a region with two pairs uses their mean distance.
pub const REGION_PAIRS: [&[(usize, usize)]; 10] = [
    &[(37, 40)],
    &[(38, 42)],
    &[(43, 46)],
    &[(44, 48)],
    &[(55, 49), (65, 61)],
    &[(52, 58)],
    &[(2, 16), (4, 14)],
    &[(22, 8), (23, 10)],
    &[(22, 23), (27, 18)],
    &[(31, 25), (31, 20)],
];

pub const DEFAULT_SUBSAMPLE: usize = 3;

/// Ten region-distance series over the retained frames, each scaled to sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionDistanceSeries<T> {
    pub series: Vec<Vec<T>>,
}

impl<T: Real> RegionDistanceSeries<T> {
    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One 10-dimensional descriptor per retained frame.
    pub fn descriptors(&self) -> Array2<T> {
        Array2::from_shape_fn((self.len(), REGION_NAMES.len()), |(t, k)| self.series[k][t])
    }
}

/// The ten raw region distances of one (already aligned) face.
pub fn region_distances<T: Real>(points: &[Point<T>; LANDMARK_COUNT]) -> [T; 10] {
    REGION_PAIRS.map(|pairs| {
        let sum: T = pairs
            .iter()
            .map(|&(a, b)| points[a - 1].distance(&points[b - 1]))
            .sum();
        sum / T::from_usize_lossy(pairs.len())
    })
}

/// Aligns every `subsample`-th valid frame to `reference` and measures the ten regions.
///
/// Invalid frames are dropped before subsampling, so retained positions count
/// valid frames only.
pub fn region_distance_series<T: Real>(
    frames: &[LandmarkFrame<T>],
    reference: &[Point<T>; LANDMARK_COUNT],
    subsample: usize,
) -> Result<RegionDistanceSeries<T>> {
    if subsample == 0 {
        return Err(Error::invalid("subsample factor must be at least 1"));
    }
    let retained: Vec<_> = frames
        .iter()
        .filter(|f| f.valid)
        .step_by(subsample)
        .collect();
    if retained.is_empty() {
        return Err(Error::invalid("no valid frames for region distances"));
    }
    let mut series = vec![Vec::with_capacity(retained.len()); REGION_NAMES.len()];
    for frame in retained {
        let transform = fit_affine(&frame.points, reference)?;
        let aligned = frame.points.map(|p| transform.apply(p));
        for (s, d) in series.iter_mut().zip(region_distances(&aligned)) {
            s.push(d);
        }
    }
    for (name, s) in REGION_NAMES.iter().zip(series.iter_mut()) {
        let total: T = s.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::invalid(format!(
                "region series {name} sums to zero; cannot normalize"
            )));
        }
        s.iter_mut().for_each(|v| *v /= total);
    }
    Ok(RegionDistanceSeries { series })
}
