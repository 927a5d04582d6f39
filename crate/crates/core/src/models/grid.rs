//! Stratified k-fold grid search over SVM cost, gamma and kernel.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelKind, KernelSpec};
use super::smo::SmoConfig;
use super::standardize::Standardizer;
use super::svm::{predict_from_kernel, sorted_classes, svm_train_with, train_one_vs_rest, SvmModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::rng;

pub const DEFAULT_FOLDS: usize = 5;

/// How grid coordinates map to actual cost / gamma values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamScale {
    /// Value is `2^coordinate`.
    Log2,
    Raw,
}

impl ParamScale {
    pub fn value(self, coordinate: f64) -> f64 {
        match self {
            ParamScale::Log2 => coordinate.exp2(),
            ParamScale::Raw => coordinate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Kernel templates; gamma is taken from the grid, degree/coef0 from the template.
    pub kernels: Vec<KernelSpec>,
    pub scale: ParamScale,
    pub folds: usize,
}

fn range(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

impl Default for GridSpec {
    /// Cost exponents −5..15 and gamma exponents −15..3, both in steps of 2, rbf kernel.
    fn default() -> Self {
        Self {
            c: range(-5, 15, 2),
            gamma: range(-15, 3, 2),
            kernels: vec![KernelSpec::rbf(1.0)],
            scale: ParamScale::Log2,
            folds: DEFAULT_FOLDS,
        }
    }
}

impl GridSpec {
    pub fn single(c: f64, gamma: f64, kernel: KernelSpec) -> Self {
        Self {
            c: vec![c],
            gamma: vec![gamma],
            kernels: vec![kernel],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid("grid search needs at least 2 folds"));
        }
        if self.c.is_empty() || self.kernels.is_empty() {
            return Err(Error::invalid("grid needs at least one cost and one kernel"));
        }
        if self.gamma.is_empty() && self.kernels.iter().any(|k| k.kind.uses_gamma()) {
            return Err(Error::invalid("grid has no gamma values for a gamma kernel"));
        }
        if self.c.iter().chain(&self.gamma).any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        Ok(())
    }
}

/// Parses `c=LO:HI[:STEP],g=LO:HI[:STEP][,k=rbf+linear][,folds=N][,raw]`.
///
/// Omitted parts keep their defaults. Ranges are inclusive integer exponents.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut grid = GridSpec::default();
        let bad = |part: &str| Error::invalid(format!("bad grid component {part:?}"));
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("raw") {
                grid.scale = ParamScale::Raw;
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| bad(part))?;
            match key.trim() {
                "c" | "g" => {
                    let nums: Vec<i32> = value
                        .split(':')
                        .map(|v| v.trim().parse().map_err(|_| bad(part)))
                        .collect::<Result<_>>()?;
                    let values = match nums[..] {
                        [v] => vec![f64::from(v)],
                        [lo, hi] if lo <= hi => range(lo, hi, 1),
                        [lo, hi, step] if lo <= hi && step > 0 => range(lo, hi, step),
                        _ => return Err(bad(part)),
                    };
                    if key.trim() == "c" {
                        grid.c = values;
                    } else {
                        grid.gamma = values;
                    }
                }
                "k" => {
                    grid.kernels = value
                        .split('+')
                        .map(|k| {
                            k.parse::<KernelKind>().map(|kind| KernelSpec {
                                kind,
                                ..KernelSpec::rbf(1.0)
                            })
                        })
                        .collect::<Result<_>>()?;
                }
                "folds" => grid.folds = value.trim().parse().map_err(|_| bad(part))?,
                _ => return Err(bad(part)),
            }
        }
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub kernel: KernelKind,
    /// Grid coordinate (exponent in log2 mode).
    pub c: f64,
    /// `None` for kernels without gamma.
    pub gamma: Option<f64>,
    pub mean_accuracy: f64,
    pub fold_accuracy: Vec<f64>,
}

impl CvRow {
    pub const CSV_HEADER: &'static str = "kernel,c,gamma,mean_accuracy,fold_accuracies";

    pub fn to_csv(&self) -> String {
        let folds: Vec<String> = self.fold_accuracy.iter().map(|a| format!("{a:.6}")).collect();
        format!(
            "{},{},{},{:.6},{}",
            self.kernel,
            self.c,
            self.gamma.map_or(String::new(), |g| g.to_string()),
            self.mean_accuracy,
            folds.join(" ")
        )
    }
}

impl fmt::Display for CvRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub best: CvRow,
    pub best_kernel: KernelSpec,
    /// Actual cost value of the best cell.
    pub best_c: f64,
    pub table: Vec<CvRow>,
    pub stratified: bool,
}

/// Fold index per row. Classes are shuffled and dealt round-robin so each fold
/// sees every class; falls back to a plain shuffle when a class has fewer
/// members than folds.
pub fn stratified_folds(y: &[u8], folds: usize, seed: u64) -> Result<(Vec<usize>, bool)> {
    if folds < 2 {
        return Err(Error::invalid("need at least 2 folds"));
    }
    if y.len() < folds {
        return Err(Error::invalid(format!(
            "{} rows cannot fill {folds} folds",
            y.len()
        )));
    }
    let mut r = rng(seed);
    let classes = sorted_classes(y);
    let stratified = classes
        .iter()
        .all(|&c| y.iter().filter(|&&v| v == c).count() >= folds);
    let groups: Vec<Vec<usize>> = if stratified {
        classes
            .iter()
            .map(|&c| (0..y.len()).filter(|&i| y[i] == c).collect())
            .collect()
    } else {
        log::warn!("a class has fewer than {folds} members; using unstratified folds");
        vec![(0..y.len()).collect()]
    };
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for mut g in groups {
        g.shuffle(&mut r);
        for i in g {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok((assignment, stratified))
}

struct FoldCache<T> {
    train: Vec<usize>,
    test: Vec<usize>,
    train_dots: Array2<T>,
    cross_dots: Array2<T>,
    train_sq: Vec<T>,
    test_sq: Vec<T>,
}

fn fold_caches<T: Real>(x: ArrayView2<T>, assignment: &[usize], folds: usize) -> Result<Vec<FoldCache<T>>> {
    (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..x.nrows()).filter(|&i| assignment[i] != f).collect();
            let test: Vec<usize> = (0..x.nrows()).filter(|&i| assignment[i] == f).collect();
            let xt = x.select(Axis(0), &train);
            let st = Standardizer::fit(xt.view())?;
            let zt = st.transform(xt.view())?;
            let zs = st.transform(x.select(Axis(0), &test).view())?;
            let sq = |m: &Array2<T>| m.outer_iter().map(|r| r.dot(&r)).collect::<Vec<T>>();
            Ok(FoldCache {
                train_dots: zt.dot(&zt.t()),
                cross_dots: zs.dot(&zt.t()),
                train_sq: sq(&zt),
                test_sq: sq(&zs),
                train,
                test,
            })
        })
        .collect()
}

fn compare_cells(a: &CvRow, ka: usize, b: &CvRow, kb: usize) -> Ordering {
    b.mean_accuracy
        .total_cmp(&a.mean_accuracy)
        .then(a.c.total_cmp(&b.c))
        .then_with(|| match (a.gamma, b.gamma) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
        .then(ka.cmp(&kb))
}

/// Mean held-out accuracy for every grid cell.
///
/// Best cell: highest accuracy, then smaller cost, then smaller gamma, then the
/// earlier kernel in `grid.kernels`. The table is in grid order and is a pure
/// function of `(x, y, grid, seed)`.
pub fn grid_search_cv<T: Real>(
    x: ArrayView2<T>,
    y: &[u8],
    grid: &GridSpec,
    seed: u64,
) -> Result<GridResult> {
    grid.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::invalid("feature rows and labels disagree"));
    }
    let (assignment, stratified) = stratified_folds(y, grid.folds, seed)?;
    let caches = fold_caches(x, &assignment, grid.folds)?;
    let smo = SmoConfig::default();

    let mut cells: Vec<(usize, KernelSpec, Option<f64>)> = Vec::new();
    for (ki, template) in grid.kernels.iter().enumerate() {
        if template.kind.uses_gamma() {
            for &g in &grid.gamma {
                let kernel = template.with_gamma(grid.scale.value(g));
                kernel.validate()?;
                cells.push((ki, kernel, Some(g)));
            }
        } else {
            cells.push((ki, *template, None));
        }
    }

    let blocks: Vec<Vec<(usize, CvRow)>> = cells
        .par_iter()
        .map(|&(ki, kernel, g)| -> Result<Vec<(usize, CvRow)>> {
            let mut fold_acc = vec![vec![0.0; grid.folds]; grid.c.len()];
            for (f, cache) in caches.iter().enumerate() {
                let ytr: Vec<u8> = cache.train.iter().map(|&i| y[i]).collect();
                let yte: Vec<u8> = cache.test.iter().map(|&i| y[i]).collect();
                let classes = sorted_classes(&ytr);
                let gram = kernel.matrix_from_parts(&cache.train_dots, &cache.train_sq, &cache.train_sq);
                let cross = kernel.matrix_from_parts(&cache.cross_dots, &cache.test_sq, &cache.train_sq);
                for (ci, &c) in grid.c.iter().enumerate() {
                    let predicted = if classes.len() == 1 {
                        vec![classes[0]; yte.len()]
                    } else {
                        let sol = train_one_vs_rest(&gram, &ytr, &classes, grid.scale.value(c), &smo)?;
                        predict_from_kernel(&cross, &ytr, &sol)
                    };
                    let hits = predicted.iter().zip(&yte).filter(|(p, t)| p == t).count();
                    fold_acc[ci][f] = hits as f64 / yte.len() as f64;
                }
            }
            Ok(grid
                .c
                .iter()
                .zip(fold_acc)
                .map(|(&c, acc)| {
                    let mean = acc.iter().sum::<f64>() / acc.len() as f64;
                    (ki, CvRow {
                        kernel: kernel.kind,
                        c,
                        gamma: g,
                        mean_accuracy: mean,
                        fold_accuracy: acc,
                    })
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let rows: Vec<(usize, CvRow)> = blocks.into_iter().flatten().collect();
    let (best_k, best) = rows
        .iter()
        .min_by(|(ka, a), (kb, b)| compare_cells(a, *ka, b, *kb))
        .cloned()
        .expect("grid has at least one cell");
    let template = grid.kernels[best_k];
    let best_kernel = match best.gamma {
        Some(g) => template.with_gamma(grid.scale.value(g)),
        None => template,
    };
    Ok(GridResult {
        best_c: grid.scale.value(best.c),
        best_kernel,
        best,
        table: rows.into_iter().map(|(_, r)| r).collect(),
        stratified,
    })
}

/// Grid search followed by a refit of the best cell on all rows.
pub fn train_with_grid<T: Real>(
    x: ArrayView2<T>,
    y: &[u8],
    grid: &GridSpec,
    seed: u64,
) -> Result<(SvmModel<T>, GridResult)> {
    grid.validate()?;
    if sorted_classes(y).len() == 1 || y.len() < grid.folds {
        // Nothing to select: fit the first grid cell.
        let template = grid.kernels[0];
        let gamma = template.kind.uses_gamma().then(|| grid.gamma[0]);
        let kernel = gamma.map_or(template, |g| template.with_gamma(grid.scale.value(g)));
        let c = grid.scale.value(grid.c[0]);
        let model = svm_train_with(x, y, c, kernel, &SmoConfig::default())?;
        let row = CvRow {
            kernel: kernel.kind,
            c: grid.c[0],
            gamma,
            mean_accuracy: f64::NAN,
            fold_accuracy: Vec::new(),
        };
        let result = GridResult {
            best: row.clone(),
            best_kernel: kernel,
            best_c: c,
            table: vec![row],
            stratified: false,
        };
        return Ok((model, result));
    }
    let result = grid_search_cv(x, y, grid, seed)?;
    let model = svm_train_with(x, y, result.best_c, result.best_kernel, &SmoConfig::default())?;
    Ok((model, result))
}
