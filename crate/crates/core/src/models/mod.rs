//! Item classifiers: SMO-trained SVMs with grid search, the eight-item ensemble and an MLP.

mod ensemble;
mod grid;
mod kernel;
mod mlp;
mod smo;
mod standardize;
mod svm;

pub use ensemble::{
    phq8_total, train_item_ensemble, ItemClassifier, ItemEnsemble, Phq8Predictor, ITEM_MAX,
};
pub use grid::{
    grid_search_cv, stratified_folds, train_with_grid, CvRow, GridResult, GridSpec, ParamScale,
    DEFAULT_FOLDS,
};
pub use kernel::{KernelKind, KernelSpec};
pub use mlp::{
    mlp_train, regression_items, Dense, Head, MlpConfig, MlpFit, MlpModel, Optimizer, Targets,
};
pub use smo::{smo_solve, SmoConfig, SmoSolution, SMO_TOL};
pub use standardize::Standardizer;
pub use svm::{svm_train, svm_train_with, BinaryMachine, SvmModel};
