//! Transcript-derived features.

mod features;
mod lexicon;

pub use features::{
    affect_features, participant_words, text_counts, text_features, AffectFeatures,
    TextConfig, TextCounts, TextFeatureVector, DEFAULT_LAUGHTER_MARKERS,
};
pub use lexicon::{
    default_depression_words, AffectLexicon, AffectRatings, DepressionLexicon, AFFECT_NAMES,
};
