//! Participant-only acoustic features from COVAREP-style LLD files.

mod dct;
mod features;
mod mask;

pub use dct::{dct2, dct2_prefix, idct2, DEFAULT_DCT_COEFFS};
pub use features::{audio_feature_vector, dct_features, lld_statistics, AudioConfig};
pub use mask::{merge_intervals, participant_mask, ParticipantMask};
