//! Diagonal-covariance Gaussian mixture fitted by EM.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

pub const DEFAULT_COMPONENTS: usize = 64;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_FLOOR_FACTOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub components: usize,
    pub max_iter: usize,
    /// Relative log-likelihood improvement below which EM stops.
    pub tol: f64,
    /// Variance floor as a fraction of the per-dimension data variance.
    pub floor_factor: f64,
    pub seed: u64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            components: DEFAULT_COMPONENTS,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            floor_factor: DEFAULT_FLOOR_FACTOR,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GmmModel<T> {
    pub weights: Array1<T>,
    /// `K × D`.
    pub means: Array2<T>,
    /// `K × D` diagonal variances.
    pub variances: Array2<T>,
    /// Per-dimension lower bound applied to every variance.
    pub variance_floor: Array1<T>,
}

#[derive(Clone, Debug)]
pub struct GmmFit<T> {
    pub model: GmmModel<T>,
    /// Total data log-likelihood after initialisation and after every EM step.
    pub log_likelihood: Vec<T>,
    pub converged: bool,
}

impl<T: Real> GmmModel<T> {
    pub fn components(&self) -> usize {
        self.means.nrows()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (k, d) = self.means.dim();
        if k == 0 || d == 0 {
            return Err(Error::invalid("GMM must have at least one component and dimension"));
        }
        if self.weights.len() != k
            || self.variances.dim() != (k, d)
            || self.variance_floor.len() != d
        {
            return Err(Error::invalid("GMM array shapes disagree"));
        }
        if self.weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::invalid("GMM weights must be positive"));
        }
        let total: T = self.weights.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::invalid(format!("GMM weights sum to {total}, not 1")));
        }
        if self
            .variances
            .iter()
            .chain(self.means.iter())
            .any(|v| !v.is_finite())
            || self.variances.iter().any(|&v| !(v > T::zero()))
        {
            return Err(Error::invalid("GMM variances must be finite and positive"));
        }
        Ok(())
    }

    /// `log w_k - ½ Σ_d ln(2π σ²_kd)` per component.
    fn log_norms(&self) -> Vec<T> {
        let two_pi = T::lit(std::f64::consts::TAU);
        self.weights
            .iter()
            .zip(self.variances.outer_iter())
            .map(|(&w, var)| {
                w.ln() - T::lit(0.5) * var.iter().map(|&v| (two_pi * v).ln()).sum::<T>()
            })
            .collect()
    }

    fn joint_log_densities(&self, x: ArrayView1<T>, norms: &[T], out: &mut [T]) {
        let half = T::lit(0.5);
        for (k, o) in out.iter_mut().enumerate() {
            let mu = self.means.row(k);
            let var = self.variances.row(k);
            let mut q = T::zero();
            for d in 0..x.len() {
                let z = x[d] - mu[d];
                q += z * z / var[d];
            }
            *o = norms[k] - half * q;
        }
    }

    /// Responsibilities `γ_k(x)`, summing to one.
    pub fn posteriors(&self, x: ArrayView1<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.components()];
        self.joint_log_densities(x, &self.log_norms(), &mut out);
        normalise_log(&mut out);
        out
    }

    /// `N × K` responsibilities for every row of `data`.
    pub fn posterior_matrix(&self, data: ArrayView2<T>) -> Array2<T> {
        let norms = self.log_norms();
        let mut out = Array2::zeros((data.nrows(), self.components()));
        for (x, mut row) in data.outer_iter().zip(out.outer_iter_mut()) {
            let slice = row.as_slice_mut().expect("standard layout");
            self.joint_log_densities(x, &norms, slice);
            normalise_log(slice);
        }
        out
    }

    /// Total log-likelihood of `data` under the mixture.
    pub fn log_likelihood(&self, data: ArrayView2<T>) -> T {
        let norms = self.log_norms();
        let mut buf = vec![T::zero(); self.components()];
        data.outer_iter()
            .map(|x| {
                self.joint_log_densities(x, &norms, &mut buf);
                log_sum_exp(&buf)
            })
            .sum()
    }

    pub fn cast<U: Real>(&self) -> GmmModel<U> {
        let c = |v: &T| U::lit(v.as_f64());
        GmmModel {
            weights: self.weights.map(c),
            means: self.means.map(c),
            variances: self.variances.map(c),
            variance_floor: self.variance_floor.map(c),
        }
    }
}

fn normalise_log<T: Real>(v: &mut [T]) {
    let lse = log_sum_exp(v);
    v.iter_mut().for_each(|x| *x = (*x - lse).exp());
}

fn population_variance<T: Real>(data: ArrayView2<T>) -> Array1<T> {
    let n = T::from_usize_lossy(data.nrows());
    let mean = data.sum_axis(Axis(0)).mapv(|s| s / n);
    let mut var = Array1::<T>::zeros(data.ncols());
    for x in data.outer_iter() {
        for d in 0..x.len() {
            let z = x[d] - mean[d];
            var[d] += z * z;
        }
    }
    var.mapv(|s: T| s / n)
}

/// Fits a `K`-component diagonal GMM: k-means initialisation followed by EM.
pub fn gmm_fit<T: Real>(data: ArrayView2<T>, config: &GmmConfig) -> Result<GmmFit<T>> {
    let (n, d) = data.dim();
    let k = config.components;
    if d == 0 {
        return Err(Error::invalid("GMM descriptors have zero dimensions"));
    }
    let km = kmeans(data, k, config.seed)?;
    let floor = population_variance(data)
        .mapv(|v| (T::lit(config.floor_factor) * v).max(T::epsilon()));

    let nf = T::from_usize_lossy(n);
    let sizes = km.cluster_sizes();
    let mut variances = Array2::<T>::zeros((k, d));
    for (x, &a) in data.outer_iter().zip(&km.assignments) {
        for j in 0..d {
            let z = x[j] - km.centroids[[a, j]];
            variances[[a, j]] += z * z;
        }
    }
    for (kk, mut row) in variances.outer_iter_mut().enumerate() {
        let c = T::from_usize_lossy(sizes[kk].max(1));
        for j in 0..d {
            row[j] = (row[j] / c).max(floor[j]);
        }
    }
    let mut model = GmmModel {
        weights: sizes.iter().map(|&s| T::from_usize_lossy(s) / nf).collect(),
        means: km.centroids,
        variances,
        variance_floor: floor,
    };

    let mut trace = vec![checked_ll(&model, data)?];
    let mut converged = false;
    for _ in 0..config.max_iter {
        m_step(&mut model, data);
        let ll = checked_ll(&model, data)?;
        let prev = *trace.last().expect("non-empty trace");
        trace.push(ll);
        if ((ll - prev) / prev.abs().max(T::min_positive_value())).abs() < T::lit(config.tol) {
            converged = true;
            break;
        }
    }
    Ok(GmmFit {
        model,
        log_likelihood: trace,
        converged,
    })
}

fn checked_ll<T: Real>(model: &GmmModel<T>, data: ArrayView2<T>) -> Result<T> {
    let ll = model.log_likelihood(data);
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::Numeric(format!("GMM log-likelihood is {ll}")))
    }
}

/// One E-step + M-step. A component whose responsibility mass underflows keeps
/// its previous mean and variance.
fn m_step<T: Real>(model: &mut GmmModel<T>, data: ArrayView2<T>) {
    let (n, d) = data.dim();
    let k = model.components();
    let gamma = model.posterior_matrix(data);
    let mass = gamma.sum_axis(Axis(0));
    let eps = T::epsilon();
    let means = gamma.t().dot(&data);
    for kk in 0..k {
        if mass[kk] <= eps {
            continue;
        }
        let inv = T::one() / mass[kk];
        for j in 0..d {
            model.means[[kk, j]] = means[[kk, j]] * inv;
        }
        for j in 0..d {
            let mu = model.means[[kk, j]];
            let s: T = gamma
                .column(kk)
                .iter()
                .zip(data.column(j))
                .map(|(&g, &x)| g * (x - mu) * (x - mu))
                .sum();
            model.variances[[kk, j]] = (s * inv).max(model.variance_floor[j]);
        }
    }
    let denom = T::from_usize_lossy(n) + T::from_usize_lossy(k) * eps;
    model.weights = mass.mapv(|m| (m + eps) / denom);
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_component_is_moment_match() {
        let x = array![[1.0_f64], [2.0], [4.0], [9.0]];
        let fit = gmm_fit(x.view(), &GmmConfig { components: 1, ..Default::default() }).unwrap();
        let m = &fit.model;
        assert!((m.means[[0, 0]] - 4.0).abs() < 1e-12);
        assert!((m.variances[[0, 0]] - 9.5).abs() < 1e-12);
        assert!((m.weights[0] - 1.0).abs() < 1e-12);
        assert_eq!(m.posteriors(array![100.0].view()), vec![1.0]);
    }

    #[test]
    fn validate_rejects_bad_weights() {
        let mut m = GmmModel {
            weights: array![0.5, 0.5],
            means: Array2::zeros((2, 1)),
            variances: Array2::ones((2, 1)),
            variance_floor: array![1e-6],
        };
        assert!(m.validate().is_ok());
        m.weights[0] = 0.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn constant_dimension_is_floored() {
        let x = Array2::from_shape_fn((30, 2), |(i, j)| if j == 0 { i as f64 } else { 3.0 });
        let fit = gmm_fit(x.view(), &GmmConfig { components: 3, ..Default::default() }).unwrap();
        assert!(fit.model.variances.iter().all(|&v| v > 0.0));
        assert!(fit.log_likelihood.iter().all(|v| v.is_finite()));
    }
}
