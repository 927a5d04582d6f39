//! Per-feature z-scoring fitted on training rows.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    /// Population standard deviation; 1 where a feature is constant.
    pub scale: Vec<T>,
}

pub(crate) fn check_finite<T: Real>(x: ArrayView2<T>) -> Result<()> {
    if let Some(((r, c), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite feature at row {r}, column {c}")));
    }
    Ok(())
}

impl<T: Real> Standardizer<T> {
    pub fn fit(x: ArrayView2<T>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::invalid("cannot standardize zero rows"));
        }
        check_finite(x)?;
        let n = T::from_usize_lossy(x.nrows());
        let mean: Vec<T> = x.sum_axis(Axis(0)).iter().map(|&s| s / n).collect();
        let scale = x
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(col, &m)| {
                let var = col.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / n;
                let sd = var.sqrt();
                if sd > T::zero() {
                    sd
                } else {
                    T::one()
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        if x.ncols() != self.width() {
            return Err(Error::invalid(format!(
                "feature width {} does not match trained width {}",
                x.ncols(),
                self.width()
            )));
        }
        check_finite(x)?;
        let mut out = x.to_owned();
        for mut row in out.outer_iter_mut() {
            for ((v, &m), &s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}
