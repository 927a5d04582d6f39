//! Landmark-derived visual features: head motion, aligned region distances,
//! blink rate and AU / gaze / pose statistics.

mod align;
mod blink;
mod channels;
mod head;
mod regions;

use std::path::Path;

pub use align::{fit_affine, AffineTransform};
pub use blink::{
    blink_features, blink_features_from_areas, count_blinks, eye_area, BlinkFeatures,
    BLINK_AREA_RATIO, DEFAULT_CLOSED_SAMPLE, EYE_POLYGON,
};
pub use channels::channel_statistics;
pub use head::{
    head_displacements, head_motion_features, Displacement, HeadMotionFeatures, DEFAULT_FPS,
    HEAD_POINTS, MOTION_CHANNELS,
};
pub use regions::{
    region_distance_series, region_distances, RegionDistanceSeries, DEFAULT_SUBSAMPLE,
    REGION_NAMES, REGION_PAIRS,
};

use crate::corpus::{data_lines, read_text, Point, LANDMARK_COUNT};
use crate::error::{Error, Result};
use crate::scalar::Real;

const REFERENCE_FACE: &str = include_str!("../../data/reference_face.csv");

fn parse_reference(text: &str, path: &Path) -> Result<[Point<f64>; LANDMARK_COUNT]> {
    let mut pts = Vec::with_capacity(LANDMARK_COUNT);
    for (row, line) in data_lines(text) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::parse(path, row, "expected x,y"));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => pts.push(Point::new(x, y)),
            _ if pts.is_empty() => continue,
            _ => return Err(Error::parse(path, row, "non-numeric coordinate")),
        }
    }
    pts.try_into().map_err(|v: Vec<_>| {
        Error::parse(path, 0, format!("expected {LANDMARK_COUNT} points, found {}", v.len()))
    })
}

/// The canonical frontal face used as the alignment target.
pub fn reference_face<T: Real>() -> [Point<T>; LANDMARK_COUNT] {
    parse_reference(REFERENCE_FACE, Path::new("reference_face.csv"))
        .expect("bundled reference face is well formed")
        .map(|p| p.cast())
}

/// Loads a replacement reference face (`x,y` rows in iBUG-68 order).
pub fn load_reference_face(path: &Path) -> Result<[Point<f64>; LANDMARK_COUNT]> {
    parse_reference(&read_text(path)?, path)
}
