use serde::{Deserialize, Serialize};

use crate::corpus::Point;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `p ↦ linear · p + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform<T> {
    pub linear: [[T; 2]; 2],
    pub translation: [T; 2],
}

impl<T: Real> AffineTransform<T> {
    pub fn identity() -> Self {
        Self {
            linear: [[T::one(), T::zero()], [T::zero(), T::one()]],
            translation: [T::zero(), T::zero()],
        }
    }

    /// Rotation by `angle` radians, uniform `scale`, then translation.
    pub fn similarity(angle: T, scale: T, tx: T, ty: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            linear: [[scale * c, -scale * s], [scale * s, scale * c]],
            translation: [tx, ty],
        }
    }

    #[inline]
    pub fn apply(&self, p: Point<T>) -> Point<T> {
        let m = &self.linear;
        Point::new(
            m[0][0] * p.x + m[0][1] * p.y + self.translation[0],
            m[1][0] * p.x + m[1][1] * p.y + self.translation[1],
        )
    }

    /// Sum of squared distances between transformed `source` points and `reference`.
    pub fn residual(&self, source: &[Point<T>], reference: &[Point<T>]) -> T {
        source
            .iter()
            .zip(reference)
            .map(|(s, r)| {
                let q = self.apply(*s);
                (q.x - r.x).powi(2) + (q.y - r.y).powi(2)
            })
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.linear.iter().flatten().all(|v| v.is_finite())
            && self.translation.iter().all(|v| v.is_finite())
    }
}

/// Least-squares affine map taking `source` onto `reference`.
///
/// Solved in centred coordinates, where the normal equations reduce to a 2×2
/// system shared by both output rows. Fails when the source points are collinear
/// or coincident.
pub fn fit_affine<T: Real>(
    source: &[Point<T>],
    reference: &[Point<T>],
) -> Result<AffineTransform<T>> {
    if source.len() != reference.len() {
        return Err(Error::invalid(format!(
            "affine fit needs matching point sets ({} vs {})",
            source.len(),
            reference.len()
        )));
    }
    if source.len() < 3 {
        return Err(Error::invalid("affine fit needs at least 3 points"));
    }
    if source
        .iter()
        .chain(reference)
        .any(|p| !p.x.is_finite() || !p.y.is_finite())
    {
        return Err(Error::invalid("affine fit on non-finite points"));
    }
    let n = T::from_usize_lossy(source.len());
    let centroid = |pts: &[Point<T>]| {
        let (sx, sy) = pts
            .iter()
            .fold((T::zero(), T::zero()), |(a, b), p| (a + p.x, b + p.y));
        Point::new(sx / n, sy / n)
    };
    let sc = centroid(source);
    let rc = centroid(reference);

    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    let mut cross = [[T::zero(); 2]; 2];
    for (s, r) in source.iter().zip(reference) {
        let (ux, uy) = (s.x - sc.x, s.y - sc.y);
        let (vx, vy) = (r.x - rc.x, r.y - rc.y);
        sxx += ux * ux;
        sxy += ux * uy;
        syy += uy * uy;
        cross[0][0] += vx * ux;
        cross[0][1] += vx * uy;
        cross[1][0] += vy * ux;
        cross[1][1] += vy * uy;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det > T::epsilon() * T::lit(1e4) * sxx * syy) || det <= T::zero() {
        return Err(Error::invalid(
            "degenerate source configuration for affine fit (collinear points)",
        ));
    }
    let inv = [[syy / det, -sxy / det], [-sxy / det, sxx / det]];
    let mut linear = [[T::zero(); 2]; 2];
    for (row, cross_row) in linear.iter_mut().zip(&cross) {
        for (j, out) in row.iter_mut().enumerate() {
            *out = cross_row[0] * inv[0][j] + cross_row[1] * inv[1][j];
        }
    }
    let translation = [
        rc.x - linear[0][0] * sc.x - linear[0][1] * sc.y,
        rc.y - linear[1][0] * sc.x - linear[1][1] * sc.y,
    ];
    let fit = AffineTransform {
        linear,
        translation,
    };
    if !fit.is_finite() {
        return Err(Error::Numeric("affine fit produced non-finite entries".into()));
    }
    Ok(fit)
}
