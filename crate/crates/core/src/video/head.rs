//! Head-motion statistics from the frame-to-frame movement of rigid facial points.

use crate::corpus::{descriptive_stats, FeatureVector, LandmarkFrame, StatSet, Statistic};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Jaw points that barely move with expressions, so their motion tracks the head.
pub const HEAD_POINTS: [usize; 4] = [2, 4, 14, 16];

pub const MOTION_CHANNELS: [&str; 6] = ["dx", "dy", "dmag", "vx", "vy", "vmag"];

pub const DEFAULT_FPS: f64 = 30.0;

/// Per tracked point, per channel: mean, median and mode (4 × 6 × 3 = 72 values).
#[derive(Clone, Debug, PartialEq)]
pub struct HeadMotionFeatures<T> {
    pub values: [[[T; 3]; 6]; 4],
}

impl<T: Real> HeadMotionFeatures<T> {
    pub fn to_feature_vector(&self) -> FeatureVector<T> {
        let mut out = FeatureVector::new();
        for (p, point) in HEAD_POINTS.iter().zip(&self.values) {
            for (ch, stats) in MOTION_CHANNELS.iter().zip(point) {
                for (st, v) in ["mean", "median", "mode"].iter().zip(stats) {
                    out.push(format!("p{p}_{ch}_{st}"), *v);
                }
            }
        }
        out
    }
}

/// Raw per-step motion of one tracked point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement<T> {
    pub dx: T,
    pub dy: T,
    pub magnitude: T,
}

/// Displacements between consecutive valid frames, one vector per tracked point.
pub fn head_displacements<T: Real>(frames: &[LandmarkFrame<T>]) -> Result<[Vec<Displacement<T>>; 4]> {
    let valid: Vec<_> = frames.iter().filter(|f| f.valid).collect();
    if valid.len() < 2 {
        return Err(Error::invalid(format!(
            "head motion needs at least 2 valid frames, found {}",
            valid.len()
        )));
    }
    Ok(HEAD_POINTS.map(|p| {
        valid
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].point(p), w[1].point(p));
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                Displacement {
                    dx,
                    dy,
                    magnitude: dx.hypot(dy),
                }
            })
            .collect()
    }))
}

/// Mean, median and mode of displacement and velocity for points 2, 4, 14 and 16.
///
/// Velocity is displacement scaled by `fps`.
pub fn head_motion_features<T: Real>(
    frames: &[LandmarkFrame<T>],
    fps: T,
) -> Result<HeadMotionFeatures<T>> {
    if !(fps > T::zero()) {
        return Err(Error::invalid("fps must be positive"));
    }
    let set = StatSet::new(vec![Statistic::Mean, Statistic::Median, Statistic::Mode])?;
    let per_point = head_displacements(frames)?;
    let mut values = [[[T::zero(); 3]; 6]; 4];
    for (out, steps) in values.iter_mut().zip(&per_point) {
        let dx: Vec<T> = steps.iter().map(|d| d.dx).collect();
        let dy: Vec<T> = steps.iter().map(|d| d.dy).collect();
        let mag: Vec<T> = steps.iter().map(|d| d.magnitude).collect();
        let scaled = |v: &[T]| v.iter().map(|&x| x * fps).collect::<Vec<T>>();
        let (vx, vy, vmag) = (scaled(&dx), scaled(&dy), scaled(&mag));
        let channels = [dx, dy, mag, vx, vy, vmag];
        for (slot, series) in out.iter_mut().zip(&channels) {
            let s = descriptive_stats(series, &set)?;
            slot.copy_from_slice(&s.values);
        }
    }
    Ok(HeadMotionFeatures { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Point;
    use crate::video::reference_face;

    fn frame(i: u64, shift: (f64, f64)) -> LandmarkFrame<f64> {
        let mut points = reference_face::<f64>();
        for p in &mut points {
            p.x += shift.0;
            p.y += shift.1;
        }
        LandmarkFrame {
            frame_index: i,
            timestamp: i as f64 / 30.0,
            confidence: 1.0,
            valid: true,
            points,
        }
    }

    #[test]
    fn three_four_five_step() {
        let mut a = frame(0, (0.0, 0.0));
        let mut b = frame(1, (0.0, 0.0));
        a.points[1] = Point::new(10.0, 20.0);
        b.points[1] = Point::new(13.0, 24.0);
        let d = head_displacements(&[a, b]).unwrap();
        assert_eq!(d[0][0], Displacement { dx: 3.0, dy: 4.0, magnitude: 5.0 });
    }

    #[test]
    fn stationary_face_is_all_zero() {
        let frames: Vec<_> = (0..10).map(|i| frame(i, (0.0, 0.0))).collect();
        let f = head_motion_features(&frames, 30.0).unwrap();
        let v = f.to_feature_vector();
        assert_eq!(v.len(), 72);
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn velocity_is_scaled_displacement() {
        let frames: Vec<_> = (0..5).map(|i| frame(i, (2.0 * i as f64, 0.0))).collect();
        let v = head_motion_features(&frames, 30.0).unwrap().to_feature_vector();
        assert_eq!(v.get("p2_dx_mean"), Some(2.0));
        assert_eq!(v.get("p2_vx_mean"), Some(60.0));
        assert_eq!(v.get("p16_dmag_mode"), Some(2.0));
    }

    #[test]
    fn needs_two_valid_frames() {
        let mut frames = vec![frame(0, (0.0, 0.0)), frame(1, (1.0, 0.0))];
        frames[1].valid = false;
        assert!(head_motion_features(&frames, 30.0).is_err());
        assert!(head_motion_features(&frames[..1], 30.0).is_err());
    }

    #[test]
    fn invalid_frames_are_skipped() {
        let mut frames: Vec<_> = (0..3).map(|i| frame(i, (i as f64, 0.0))).collect();
        frames[1].valid = false;
        let d = head_displacements(&frames).unwrap();
        assert_eq!(d[0].len(), 1);
        assert_eq!(d[0][0].dx, 2.0);
    }
}
