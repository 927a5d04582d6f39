//! Bag-of-descriptors encoding: k-means, diagonal GMM and Fisher vectors.

mod fisher;
mod gmm;
mod kmeans;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use fisher::{fisher_encode, fisher_names, FisherOptions, FisherVector};
pub use gmm::{
    gmm_fit, GmmConfig, GmmFit, GmmModel, DEFAULT_COMPONENTS, DEFAULT_FLOOR_FACTOR,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use kmeans::{kmeans, KMeans, KMEANS_MAX_ITER};

use crate::corpus::{read_text, write_text};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const GMM_FORMAT_VERSION: u32 = 1;

/// On-disk form of a frozen GMM plus the settings needed to reproduce encodings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GmmDocument<T> {
    pub format_version: u32,
    pub components: usize,
    pub dim: usize,
    pub floor_factor: f64,
    pub seed: u64,
    /// Gradient blocks present in the encoding, in order.
    pub fisher_blocks: Vec<String>,
    pub fisher: FisherOptions,
    pub model: GmmModel<T>,
}

impl<T: Real> GmmDocument<T> {
    pub fn new(model: GmmModel<T>, config: &GmmConfig, fisher: FisherOptions) -> Self {
        Self {
            format_version: GMM_FORMAT_VERSION,
            components: model.components(),
            dim: model.dim(),
            floor_factor: config.floor_factor,
            seed: config.seed,
            fisher_blocks: vec!["mean".into(), "variance".into()],
            fisher,
            model,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Document {
            path: path.to_path_buf(),
            source,
        })?;
        write_text(path, &text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let doc: Self = serde_json::from_str(&text).map_err(|source| Error::Document {
            path: path.to_path_buf(),
            source,
        })?;
        if doc.format_version != GMM_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "{}: unsupported GMM format version {}",
                path.display(),
                doc.format_version
            )));
        }
        doc.model.validate()?;
        if doc.model.components() != doc.components || doc.model.dim() != doc.dim {
            return Err(Error::invalid(format!(
                "{}: declared K/D do not match arrays",
                path.display()
            )));
        }
        Ok(doc)
    }
}
