//! SVM kernel functions.

use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
    Polynomial,
    Sigmoid,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Sigmoid => "sigmoid",
        }
    }

    pub fn uses_gamma(self) -> bool {
        self != KernelKind::Linear
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "rbf" | "radial" => Ok(KernelKind::Rbf),
            "polynomial" | "poly" => Ok(KernelKind::Polynomial),
            "sigmoid" => Ok(KernelKind::Sigmoid),
            other => Err(Error::invalid(format!("unknown kernel {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self { kind: KernelKind::Linear, gamma: 1.0, degree: 3, coef0: 0.0 }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self { kind: KernelKind::Rbf, gamma, degree: 3, coef0: 0.0 }
    }

    pub fn polynomial(gamma: f64, degree: u32, coef0: f64) -> Self {
        Self { kind: KernelKind::Polynomial, gamma, degree, coef0 }
    }

    pub fn sigmoid(gamma: f64, coef0: f64) -> Self {
        Self { kind: KernelKind::Sigmoid, gamma, degree: 3, coef0 }
    }

    /// Same kind with a different `gamma`, keeping degree and coef0.
    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_gamma() && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "{} kernel needs a positive gamma, got {}",
                self.kind, self.gamma
            )));
        }
        if self.kind == KernelKind::Polynomial && self.degree == 0 {
            return Err(Error::invalid("polynomial kernel degree must be >= 1"));
        }
        Ok(())
    }

    /// Kernel value from the dot product and squared norms of the two arguments.
    #[inline]
    pub fn from_parts<T: Real>(&self, dot: T, sq_a: T, sq_b: T) -> T {
        let g = T::lit(self.gamma);
        match self.kind {
            KernelKind::Linear => dot,
            KernelKind::Rbf => (-(g * (sq_a + sq_b - T::lit(2.0) * dot).max(T::zero()))).exp(),
            KernelKind::Polynomial => (g * dot + T::lit(self.coef0)).powi(self.degree as i32),
            KernelKind::Sigmoid => (g * dot + T::lit(self.coef0)).tanh(),
        }
    }

    pub fn eval<T: Real>(&self, a: ArrayView1<T>, b: ArrayView1<T>) -> T {
        match self.kind {
            KernelKind::Rbf => {
                let d: T = a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum();
                (-(T::lit(self.gamma) * d)).exp()
            }
            _ => self.from_parts(a.dot(&b), T::zero(), T::zero()),
        }
    }

    /// `K[i, j] = k(a_i, b_j)`.
    pub fn matrix<T: Real>(&self, a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T> {
        let dots = a.dot(&b.t());
        let na: Vec<T> = a.outer_iter().map(|r| r.dot(&r)).collect();
        let nb: Vec<T> = b.outer_iter().map(|r| r.dot(&r)).collect();
        self.matrix_from_parts(&dots, &na, &nb)
    }

    pub fn matrix_from_parts<T: Real>(&self, dots: &Array2<T>, na: &[T], nb: &[T]) -> Array2<T> {
        Array2::from_shape_fn(dots.dim(), |(i, j)| self.from_parts(dots[[i, j]], na[i], nb[j]))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            KernelKind::Linear => write!(f, "linear"),
            KernelKind::Rbf => write!(f, "rbf(gamma={})", self.gamma),
            KernelKind::Polynomial => write!(
                f,
                "polynomial(gamma={}, degree={}, coef0={})",
                self.gamma, self.degree, self.coef0
            ),
            KernelKind::Sigmoid => write!(f, "sigmoid(gamma={}, coef0={})", self.gamma, self.coef0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_agrees_with_pointwise() {
        let a = array![[0.0_f64, 1.0], [2.0, -1.0]];
        let b = array![[1.0, 1.0], [0.5, 0.0], [-3.0, 2.0]];
        for k in [
            KernelSpec::linear(),
            KernelSpec::rbf(0.3),
            KernelSpec::polynomial(0.5, 3, 1.0),
            KernelSpec::sigmoid(0.1, -0.2),
        ] {
            let m = k.matrix(a.view(), b.view());
            for i in 0..2 {
                for j in 0..3 {
                    assert!((m[[i, j]] - k.eval(a.row(i), b.row(j))).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rbf_needs_positive_gamma() {
        assert!(KernelSpec::rbf(0.0).validate().is_err());
        assert!(KernelSpec::linear().validate().is_ok());
        assert_eq!("Radial".parse::<KernelKind>().unwrap(), KernelKind::Rbf);
    }
}
