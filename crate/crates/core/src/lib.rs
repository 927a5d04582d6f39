//! Depression-severity estimation from pre-extracted interview data.
//!
//! Visual features come from 2-D facial landmarks (head motion, aligned region
//! distances encoded as Fisher vectors, blink rate) and from AU / gaze / pose
//! channel statistics. Audio features summarise participant-only low-level
//! descriptors with statistics and DCT coefficients. Text features count words,
//! laughter and lexicon hits. Each modality trains eight PHQ-8 item classifiers
//! whose scores sum to a 0–24 total; modalities are combined by decision-level
//! fusion and scored with RMSE / MAE.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common double-precision instantiations.

// `!(x > 0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod corpus;
pub mod error;
pub mod fusion;
pub mod fv;
pub mod models;
pub mod pipeline;
pub mod scalar;
pub mod seed;
pub mod text;
pub mod video;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Real;

pub type Frame = corpus::LandmarkFrame<f64>;
pub type LldSeries = corpus::LldFrameSeries<f64>;
pub type Affine = video::AffineTransform<f64>;
pub type Gmm = fv::GmmModel<f64>;
pub type GmmF32 = fv::GmmModel<f32>;
pub type FisherVec = fv::FisherVector<f64>;
pub type Svm = models::SvmModel<f64>;
pub type Mlp = models::MlpModel<f64>;
pub type MlpF32 = models::MlpModel<f32>;
