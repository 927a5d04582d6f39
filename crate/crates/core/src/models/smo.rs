//! Sequential minimal optimisation for the binary C-SVM dual.
//!
//! Solves `min ½ αᵀQα − eᵀα` subject to `0 ≤ α ≤ C`, `yᵀα = 0`, with
//! `Q_ij = y_i y_j K_ij`, choosing the maximal violating pair each step.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SMO_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoConfig {
    /// Stop once the maximal KKT violation `m(α) − M(α)` drops below this.
    pub tol: f64,
    /// Defaults to `max(100_000, 100·N)` when `None`.
    pub max_iter: Option<usize>,
    /// Keep the dual objective after every update.
    pub record_objective: bool,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            tol: SMO_TOL,
            max_iter: None,
            record_objective: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution<T> {
    pub alpha: Vec<T>,
    /// Decision function is `Σ α_i y_i K(x_i, x) − rho`.
    pub rho: T,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub kkt_gap: T,
    pub converged: bool,
    /// Dual objective `eᵀα − ½ αᵀQα`, initial value first; empty unless recorded.
    pub objective: Vec<T>,
}

fn dual_objective<T: Real>(alpha: &[T], grad: &[T]) -> T {
    // With G = Qα − e:  eᵀα − ½αᵀQα = −½ Σ α_i (G_i − 1).
    -T::lit(0.5)
        * alpha
            .iter()
            .zip(grad)
            .map(|(&a, &g)| a * (g - T::one()))
            .sum::<T>()
}

/// Solves one binary problem over a precomputed `N × N` kernel matrix and labels `±1`.
pub fn smo_solve<T: Real>(
    kernel: &Array2<T>,
    y: &[i8],
    c: T,
    config: &SmoConfig,
) -> Result<SmoSolution<T>> {
    let n = y.len();
    if kernel.dim() != (n, n) {
        return Err(Error::invalid("kernel matrix shape does not match label count"));
    }
    if !(c > T::zero()) || !c.is_finite() {
        return Err(Error::invalid(format!("SVM cost must be positive, got {c}")));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::invalid("binary SVM labels must be +1 or -1"));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::invalid("binary SVM needs both classes"));
    }
    let yf: Vec<T> = y.iter().map(|&v| T::lit(v as f64)).collect();
    let q = |i: usize, j: usize| yf[i] * yf[j] * kernel[[i, j]];
    let tau = T::lit(1e-12);
    let tol = T::lit(config.tol);
    let max_iter = config.max_iter.unwrap_or_else(|| (100 * n).max(100_000));

    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let mut objective = Vec::new();
    if config.record_objective {
        objective.push(T::zero());
    }
    let in_up = |a: T, yy: i8| (yy == 1 && a < c) || (yy == -1 && a > T::zero());
    let in_low = |a: T, yy: i8| (yy == 1 && a > T::zero()) || (yy == -1 && a < c);

    let mut iterations = 0;
    let mut gap;
    loop {
        let mut i = usize::MAX;
        let mut gmax = T::neg_infinity();
        let mut j = usize::MAX;
        let mut gmin = T::infinity();
        for t in 0..n {
            let v = -yf[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < tol || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut a_i = old_i;
        let mut a_j = old_j;
        if y[i] != y[j] {
            let mut quad = kernel[[i, i]] + kernel[[j, j]] + T::lit(2.0) * q(i, j);
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = a_i - a_j;
            a_i += delta;
            a_j += delta;
            if diff > T::zero() {
                if a_j < T::zero() {
                    a_j = T::zero();
                    a_i = diff;
                }
            } else if a_i < T::zero() {
                a_i = T::zero();
                a_j = -diff;
            }
            if diff > T::zero() {
                if a_i > c {
                    a_i = c;
                    a_j = c - diff;
                }
            } else if a_j > c {
                a_j = c;
                a_i = c + diff;
            }
        } else {
            let mut quad = kernel[[i, i]] + kernel[[j, j]] - T::lit(2.0) * q(i, j);
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = a_i + a_j;
            a_i -= delta;
            a_j += delta;
            if sum > c {
                if a_i > c {
                    a_i = c;
                    a_j = sum - c;
                }
            } else if a_j < T::zero() {
                a_j = T::zero();
                a_i = sum;
            }
            if sum > c {
                if a_j > c {
                    a_j = c;
                    a_i = sum - c;
                }
            } else if a_i < T::zero() {
                a_i = T::zero();
                a_j = sum;
            }
        }
        alpha[i] = a_i;
        alpha[j] = a_j;
        let (di, dj) = (a_i - old_i, a_j - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
        if config.record_objective {
            objective.push(dual_objective(&alpha, &grad));
        }
    }
    if !gap.is_finite() && gap != T::neg_infinity() {
        return Err(Error::Numeric(format!("SMO diverged (KKT gap {gap})")));
    }

    // Bias: average over free vectors, else midpoint of the feasible interval.
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut free_sum = T::zero();
    let mut free = 0usize;
    for t in 0..n {
        let yg = yf[t] * grad[t];
        if alpha[t] >= c {
            if y[t] == -1 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= T::zero() {
            if y[t] == 1 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / T::from_usize_lossy(free)
    } else {
        (ub + lb) * T::lit(0.5)
    };
    Ok(SmoSolution {
        alpha,
        rho,
        iterations,
        kkt_gap: gap.max(T::zero()),
        converged: gap < tol,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::KernelSpec;
    use ndarray::array;

    #[test]
    fn two_points_closed_form() {
        let x = array![[1.0_f64, 1.0], [-1.0, -1.0]];
        let k = KernelSpec::linear().matrix(x.view(), x.view());
        let s = smo_solve(&k, &[1, -1], 10.0, &SmoConfig::default()).unwrap();
        // w = 2 (x1 − x2)/‖x1 − x2‖² = (0.5, 0.5), bias 0.
        assert!((s.alpha[0] - 0.25).abs() < 1e-12);
        assert!((s.alpha[1] - 0.25).abs() < 1e-12);
        assert!(s.rho.abs() < 1e-12);
        assert!(s.converged);
    }

    #[test]
    fn objective_never_decreases() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0], [0.5, 0.4], [0.2, 0.9]];
        let k = KernelSpec::rbf(1.0).matrix(x.view(), x.view());
        let cfg = SmoConfig { record_objective: true, ..Default::default() };
        let s = smo_solve(&k, &[1, 1, -1, -1, 1, -1], 5.0, &cfg).unwrap();
        assert!(s.objective.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(s.alpha.iter().all(|&a| (0.0..=5.0).contains(&a)));
    }

    #[test]
    fn one_class_is_rejected() {
        let k = Array2::<f64>::eye(2);
        assert!(smo_solve(&k, &[1, 1], 1.0, &SmoConfig::default()).is_err());
    }
}
