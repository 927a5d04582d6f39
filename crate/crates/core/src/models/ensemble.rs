//! Eight per-item classifiers whose predictions sum to a PHQ-8 total.

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{train_with_grid, GridResult, GridSpec};
use super::svm::SvmModel;
use crate::corpus::{Phq8Labels, PHQ8_ITEMS};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::derive_seed;

pub const ITEM_MAX: u8 = 3;

/// Anything that predicts one PHQ-8 item score (0–3) per feature row.
pub trait ItemClassifier<T: Real>: Send + Sync {
    fn predict_labels(&self, x: ArrayView2<T>) -> Result<Vec<u8>>;
}

impl<T: Real> ItemClassifier<T> for SvmModel<T> {
    fn predict_labels(&self, x: ArrayView2<T>) -> Result<Vec<u8>> {
        self.predict(x)
    }
}

/// Predicts all eight item scores per row.
pub trait Phq8Predictor<T: Real> {
    fn predict_items(&self, x: ArrayView2<T>) -> Result<Vec<[u8; 8]>>;

    /// Sum of the eight items, in `0..=24`.
    fn predict_totals(&self, x: ArrayView2<T>) -> Result<Vec<u8>> {
        Ok(self.predict_items(x)?.iter().map(|items| phq8_total(items)).collect())
    }
}

pub fn phq8_total(items: &[u8; 8]) -> u8 {
    items.iter().sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemEnsemble<M> {
    members: Vec<M>,
}

impl<M> ItemEnsemble<M> {
    pub fn new(members: Vec<M>) -> Result<Self> {
        if members.len() != PHQ8_ITEMS.len() {
            return Err(Error::invalid(format!(
                "an item ensemble needs {} members, got {}",
                PHQ8_ITEMS.len(),
                members.len()
            )));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[M] {
        &self.members
    }
}

impl<T: Real, M: ItemClassifier<T>> Phq8Predictor<T> for ItemEnsemble<M> {
    fn predict_items(&self, x: ArrayView2<T>) -> Result<Vec<[u8; 8]>> {
        let mut out = vec![[0u8; 8]; x.nrows()];
        for (item, member) in self.members.iter().enumerate() {
            let labels = member.predict_labels(x)?;
            if labels.len() != x.nrows() {
                return Err(Error::invalid(format!(
                    "item {} classifier returned {} labels for {} rows",
                    PHQ8_ITEMS[item],
                    labels.len(),
                    x.nrows()
                )));
            }
            for (row, &l) in out.iter_mut().zip(&labels) {
                if l > ITEM_MAX {
                    return Err(Error::invalid(format!(
                        "item {} classifier predicted {l}, outside 0..=3",
                        PHQ8_ITEMS[item]
                    )));
                }
                row[item] = l;
            }
        }
        Ok(out)
    }
}

/// Trains an independent grid-searched SVM for every item, in parallel.
///
/// Returns the ensemble and each item's cross-validation result.
pub fn train_item_ensemble<T: Real>(
    x: ArrayView2<T>,
    labels: &[Phq8Labels],
    grid: &GridSpec,
    seed: u64,
) -> Result<(ItemEnsemble<SvmModel<T>>, Vec<GridResult>)> {
    if labels.len() < 2 {
        return Err(Error::invalid("ensemble training needs at least 2 labelled sessions"));
    }
    if x.nrows() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} label rows",
            x.nrows(),
            labels.len()
        )));
    }
    let trained: Vec<(SvmModel<T>, GridResult)> = (0..PHQ8_ITEMS.len())
        .into_par_iter()
        .map(|item| {
            let y: Vec<u8> = labels.iter().map(|l| l.items()[item]).collect();
            train_with_grid(x, &y, grid, derive_seed(seed, PHQ8_ITEMS[item]))
        })
        .collect::<Result<_>>()?;
    let (members, results) = trained.into_iter().unzip();
    Ok((ItemEnsemble::new(members)?, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    struct Fixed(u8);

    impl ItemClassifier<f64> for Fixed {
        fn predict_labels(&self, x: ArrayView2<f64>) -> Result<Vec<u8>> {
            Ok(vec![self.0; x.nrows()])
        }
    }

    #[test]
    fn totals_are_item_sums() {
        let e = ItemEnsemble::new([1, 2, 0, 3, 1, 0, 2, 1].map(Fixed).into()).unwrap();
        let x = Array2::<f64>::zeros((2, 1));
        assert_eq!(e.predict_totals(x.view()).unwrap(), vec![10, 10]);
        let all3 = ItemEnsemble::new((0..8).map(|_| Fixed(3)).collect()).unwrap();
        assert_eq!(all3.predict_totals(x.view()).unwrap(), vec![24, 24]);
    }

    #[test]
    fn wrong_size_or_range() {
        assert!(ItemEnsemble::new(vec![Fixed(0)]).is_err());
        let e = ItemEnsemble::new((0..8).map(|_| Fixed(4)).collect()).unwrap();
        assert!(e.predict_items(Array2::<f64>::zeros((1, 1)).view()).is_err());
    }
}
