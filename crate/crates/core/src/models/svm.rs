//! One-vs-rest multi-class SVM over standardized features.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::smo::{smo_solve, SmoConfig, SmoSolution};
use super::standardize::Standardizer;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One "class vs rest" decision function over the model's shared support vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BinaryMachine<T> {
    pub label: u8,
    /// `α_i y_i` per shared support vector (zero where this machine does not use it).
    pub coef: Vec<T>,
    pub rho: T,
    pub iterations: usize,
    pub kkt_gap: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SvmModel<T> {
    pub kernel: KernelSpec,
    pub c: f64,
    /// Labels seen in training, ascending.
    pub classes: Vec<u8>,
    pub standardizer: Standardizer<T>,
    /// Standardized training rows that are a support vector of at least one machine.
    pub support: Array2<T>,
    pub machines: Vec<BinaryMachine<T>>,
    /// Set when training saw a single label; every prediction is that label.
    pub constant: Option<u8>,
}

pub(crate) fn sorted_classes(y: &[u8]) -> Vec<u8> {
    y.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Trains one SMO machine per class against the rest on a precomputed kernel.
pub(crate) fn train_one_vs_rest<T: Real>(
    kernel: &Array2<T>,
    y: &[u8],
    classes: &[u8],
    c: f64,
    config: &SmoConfig,
) -> Result<Vec<(u8, SmoSolution<T>)>> {
    classes
        .iter()
        .map(|&label| {
            let yy: Vec<i8> = y.iter().map(|&v| if v == label { 1 } else { -1 }).collect();
            smo_solve(kernel, &yy, T::lit(c), config).map(|s| (label, s))
        })
        .collect()
}

/// Argmax over per-class decision values; ties go to the earlier (smaller) label.
pub(crate) fn argmax_label<T: Real>(values: impl Iterator<Item = T>, classes: &[u8]) -> u8 {
    let mut best = (classes[0], T::neg_infinity());
    for (v, &label) in values.zip(classes) {
        if v > best.1 {
            best = (label, v);
        }
    }
    best.0
}

/// Labels from a `test × train` kernel block and one-vs-rest solutions.
pub(crate) fn predict_from_kernel<T: Real>(
    cross: &Array2<T>,
    y: &[u8],
    solutions: &[(u8, SmoSolution<T>)],
) -> Vec<u8> {
    let classes: Vec<u8> = solutions.iter().map(|(l, _)| *l).collect();
    cross
        .outer_iter()
        .map(|k| {
            let values = solutions.iter().map(|(label, s)| {
                let mut f = -s.rho;
                for (t, &a) in s.alpha.iter().enumerate() {
                    if a > T::zero() {
                        let yt = if y[t] == *label { T::one() } else { -T::one() };
                        f += a * yt * k[t];
                    }
                }
                f
            });
            argmax_label(values, &classes)
        })
        .collect()
}

pub fn svm_train<T: Real>(
    x: ArrayView2<T>,
    y: &[u8],
    c: f64,
    kernel: KernelSpec,
) -> Result<SvmModel<T>> {
    svm_train_with(x, y, c, kernel, &SmoConfig::default())
}

pub fn svm_train_with<T: Real>(
    x: ArrayView2<T>,
    y: &[u8],
    c: f64,
    kernel: KernelSpec,
    config: &SmoConfig,
) -> Result<SvmModel<T>> {
    kernel.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < 2 {
        return Err(Error::invalid("SVM training needs at least 2 rows"));
    }
    let standardizer = Standardizer::fit(x)?;
    let z = standardizer.transform(x)?;
    let classes = sorted_classes(y);
    if classes.len() == 1 {
        log::warn!("all {} training labels equal {}; using a constant model", y.len(), classes[0]);
        return Ok(SvmModel {
            kernel,
            c,
            constant: Some(classes[0]),
            classes,
            support: Array2::zeros((0, standardizer.width())),
            standardizer,
            machines: Vec::new(),
        });
    }
    let gram = kernel.matrix(z.view(), z.view());
    let solutions = train_one_vs_rest(&gram, y, &classes, c, config)?;
    let idx: Vec<usize> = (0..y.len())
        .filter(|&t| solutions.iter().any(|(_, s)| s.alpha[t] > T::zero()))
        .collect();
    let machines = solutions
        .into_iter()
        .map(|(label, s)| BinaryMachine {
            label,
            coef: idx
                .iter()
                .map(|&t| if y[t] == label { s.alpha[t] } else { -s.alpha[t] })
                .collect(),
            rho: s.rho,
            iterations: s.iterations,
            kkt_gap: s.kkt_gap,
        })
        .collect();
    let support = z.select(Axis(0), &idx);
    Ok(SvmModel {
        kernel,
        c,
        classes,
        standardizer,
        support,
        machines,
        constant: None,
    })
}

impl<T: Real> SvmModel<T> {
    /// `rows × classes` one-vs-rest decision values (all zero for a constant model).
    pub fn decision_values(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        let z = self.standardizer.transform(x)?;
        let k = self.kernel.matrix(z.view(), self.support.view());
        let mut out = Array2::zeros((x.nrows(), self.machines.len()));
        for (m, machine) in self.machines.iter().enumerate() {
            let coef = ArrayView1::from(&machine.coef);
            for r in 0..x.nrows() {
                out[[r, m]] = k.row(r).dot(&coef) - machine.rho;
            }
        }
        Ok(out)
    }

    pub fn predict(&self, x: ArrayView2<T>) -> Result<Vec<u8>> {
        if let Some(label) = self.constant {
            self.standardizer.transform(x)?;
            return Ok(vec![label; x.nrows()]);
        }
        let dv = self.decision_values(x)?;
        Ok(dv
            .outer_iter()
            .map(|row| argmax_label(row.iter().copied(), &self.classes))
            .collect())
    }

    pub fn support_count(&self) -> usize {
        self.support.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn xor_with_rbf() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [0, 0, 1, 1];
        let m = svm_train(x.view(), &y, 100.0, KernelSpec::rbf(1.0)).unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), y);
    }

    #[test]
    fn constant_labels() {
        let x = array![[0.0], [1.0], [2.0]];
        let m = svm_train(x.view(), &[2, 2, 2], 1.0, KernelSpec::linear()).unwrap();
        assert_eq!(m.constant, Some(2));
        assert_eq!(m.predict(array![[5.0]].view()).unwrap(), vec![2]);
        assert!(m.predict(array![[5.0, 1.0]].view()).is_err());
    }

    #[test]
    fn tie_goes_to_smaller_label() {
        assert_eq!(argmax_label([1.0, 1.0, 0.5].into_iter(), &[0, 1, 2]), 0);
        assert_eq!(argmax_label([0.0, 2.0, 2.0].into_iter(), &[1, 2, 3]), 2);
    }

    #[test]
    fn three_classes_on_a_line() {
        let x = array![[0.0], [0.1], [5.0], [5.1], [10.0], [10.1]];
        let y = [0, 0, 1, 1, 3, 3];
        let m = svm_train(x.view(), &y, 1000.0, KernelSpec::rbf(2.0)).unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), y);
        assert_eq!(m.classes, vec![0, 1, 3]);
    }
}
