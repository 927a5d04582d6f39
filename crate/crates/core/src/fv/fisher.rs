//! Improved Fisher-vector encoding (mean and variance gradients).

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::gmm::GmmModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FisherOptions {
    /// Signed square root of every coordinate.
    pub power_norm: bool,
    pub l2_norm: bool,
}

impl Default for FisherOptions {
    fn default() -> Self {
        Self {
            power_norm: true,
            l2_norm: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FisherVector<T> {
    /// `K·D` mean-gradient entries followed by `K·D` variance-gradient entries,
    /// component-major within each block.
    pub values: Vec<T>,
    pub components: usize,
    pub dim: usize,
    pub power_normalized: bool,
    pub l2_normalized: bool,
}

impl<T: Real> FisherVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn names(&self) -> Vec<String> {
        fisher_names(self.components, self.dim)
    }
}

pub fn fisher_names(k: usize, d: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(2 * k * d);
    for block in ["mu", "sigma"] {
        for c in 0..k {
            for j in 0..d {
                names.push(format!("fv_{block}_k{c}_d{j}"));
            }
        }
    }
    names
}

/// Encodes `T × D` descriptors against `model`.
pub fn fisher_encode<T: Real>(
    model: &GmmModel<T>,
    descriptors: ArrayView2<T>,
    options: FisherOptions,
) -> Result<FisherVector<T>> {
    let (t, d) = descriptors.dim();
    let k = model.components();
    if t == 0 {
        return Err(Error::invalid("Fisher encoding needs at least one descriptor"));
    }
    if d != model.dim() {
        return Err(Error::invalid(format!(
            "descriptor dimension {d} does not match GMM dimension {}",
            model.dim()
        )));
    }
    let gamma = model.posterior_matrix(descriptors);
    let sigma = model.variances.mapv(|v| v.sqrt());
    let mut values = vec![T::zero(); 2 * k * d];
    let (mean_block, var_block) = values.split_at_mut(k * d);
    for (x, g) in descriptors.outer_iter().zip(gamma.outer_iter()) {
        for c in 0..k {
            let gc = g[c];
            if gc == T::zero() {
                continue;
            }
            for j in 0..d {
                let z = (x[j] - model.means[[c, j]]) / sigma[[c, j]];
                mean_block[c * d + j] += gc * z;
                var_block[c * d + j] += gc * (z * z - T::one());
            }
        }
    }
    let tf = T::from_usize_lossy(t);
    let two = T::lit(2.0);
    for c in 0..k {
        let w = model.weights[c];
        let sm = T::one() / (tf * w.sqrt());
        let sv = T::one() / (tf * (two * w).sqrt());
        for j in 0..d {
            mean_block[c * d + j] *= sm;
            var_block[c * d + j] *= sv;
        }
    }
    if options.power_norm {
        values.iter_mut().for_each(|v| *v = v.signum() * v.abs().sqrt());
    }
    if options.l2_norm {
        let norm = values.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > T::zero() {
            values.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(FisherVector {
        values,
        components: k,
        dim: d,
        power_normalized: options.power_norm,
        l2_normalized: options.l2_norm,
    })
}
