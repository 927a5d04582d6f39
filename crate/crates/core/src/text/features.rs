//! Counts, ratios and affect-norm averages over the participant's words.

use std::collections::BTreeSet;

use log::warn;

use super::lexicon::{AffectLexicon, DepressionLexicon, AFFECT_NAMES};
use crate::corpus::{FeatureVector, Speaker, TranscriptEntry};
use crate::error::{Error, Result};

pub const DEFAULT_LAUGHTER_MARKERS: [&str; 3] = ["<laughter>", "[laughter]", "laughter"];

#[derive(Clone, Debug, PartialEq)]
pub struct TextConfig {
    pub laughter_markers: BTreeSet<String>,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self {
            laughter_markers: DEFAULT_LAUGHTER_MARKERS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TextCounts {
    pub sentences_per_second: f64,
    pub words_per_second: f64,
    pub mean_words_per_sentence: f64,
    /// Laughter markers over all spoken tokens (words plus markers).
    pub laughter_ratio: f64,
    pub depression_word_ratio: f64,
    /// Set when the participant produced no words and the ratios defaulted to zero.
    pub no_words: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffectFeatures {
    pub means: [f64; 7],
    /// Set when no participant word was found in the lexicon.
    pub no_hits: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TextFeatureVector {
    pub counts: TextCounts,
    pub affect: AffectFeatures,
}

impl TextFeatureVector {
    pub fn to_feature_vector(&self) -> FeatureVector<f64> {
        let c = &self.counts;
        let mut v = FeatureVector::new();
        v.push("sentences_per_second", c.sentences_per_second);
        v.push("words_per_second", c.words_per_second);
        v.push("mean_words_per_sentence", c.mean_words_per_sentence);
        v.push("laughter_ratio", c.laughter_ratio);
        v.push("depression_word_ratio", c.depression_word_ratio);
        for (n, m) in AFFECT_NAMES.iter().zip(self.affect.means) {
            v.push(format!("affect_{n}"), m);
        }
        v
    }
}

enum Token {
    Word(String),
    Laughter,
    Annotation,
}

fn classify(raw: &str, config: &TextConfig) -> Token {
    let lower = raw.to_lowercase();
    if config.laughter_markers.contains(&lower) {
        return Token::Laughter;
    }
    let bracketed = (lower.starts_with('<') && lower.ends_with('>'))
        || (lower.starts_with('[') && lower.ends_with(']'));
    if bracketed {
        return Token::Annotation;
    }
    let word = lower.trim_matches(|c: char| c.is_ascii_punctuation());
    if word.is_empty() {
        Token::Annotation
    } else if config.laughter_markers.contains(word) {
        Token::Laughter
    } else {
        Token::Word(word.to_string())
    }
}

/// Lowercased participant words with punctuation stripped and annotation markers removed.
pub fn participant_words(transcript: &[TranscriptEntry], config: &TextConfig) -> Vec<String> {
    transcript
        .iter()
        .filter(|e| e.speaker == Speaker::Participant)
        .flat_map(|e| e.tokens.iter())
        .filter_map(|t| match classify(t, config) {
            Token::Word(w) => Some(w),
            _ => None,
        })
        .collect()
}

pub fn text_counts(
    transcript: &[TranscriptEntry],
    duration: f64,
    lexicon: &DepressionLexicon,
    config: &TextConfig,
) -> Result<TextCounts> {
    if !(duration > 0.0) {
        return Err(Error::invalid("duration must be positive"));
    }
    let mut sentences = 0usize;
    let mut words = 0usize;
    let mut laughs = 0usize;
    let mut hits = 0usize;
    for entry in transcript.iter().filter(|e| e.speaker == Speaker::Participant) {
        sentences += 1;
        for tok in &entry.tokens {
            match classify(tok, config) {
                Token::Word(w) => {
                    words += 1;
                    hits += usize::from(lexicon.contains(&w));
                }
                Token::Laughter => laughs += 1,
                Token::Annotation => {}
            }
        }
    }
    let mut counts = TextCounts {
        sentences_per_second: sentences as f64 / duration,
        words_per_second: words as f64 / duration,
        mean_words_per_sentence: if sentences > 0 {
            words as f64 / sentences as f64
        } else {
            0.0
        },
        ..TextCounts::default()
    };
    if words == 0 {
        warn!("participant produced no words; text ratios set to 0");
        counts.no_words = true;
    } else {
        counts.laughter_ratio = laughs as f64 / (words + laughs) as f64;
        counts.depression_word_ratio = hits as f64 / words as f64;
    }
    Ok(counts)
}

/// Per-dimension mean of the affect ratings of participant words found in `lexicon`.
pub fn affect_features(
    transcript: &[TranscriptEntry],
    lexicon: &AffectLexicon,
    config: &TextConfig,
) -> Result<AffectFeatures> {
    if lexicon.is_empty() {
        return Err(Error::invalid("affect lexicon is empty"));
    }
    let mut sums = [0.0; 7];
    let mut hits = 0usize;
    for w in participant_words(transcript, config) {
        if let Some(r) = lexicon.get(&w) {
            hits += 1;
            sums.iter_mut().zip(r).for_each(|(s, v)| *s += v);
        }
    }
    if hits == 0 {
        warn!("no participant word found in the affect lexicon; affect features set to 0");
        return Ok(AffectFeatures {
            means: [0.0; 7],
            no_hits: true,
        });
    }
    Ok(AffectFeatures {
        means: sums.map(|s| s / hits as f64),
        no_hits: false,
    })
}

pub fn text_features(
    transcript: &[TranscriptEntry],
    duration: f64,
    depression: &DepressionLexicon,
    affect: &AffectLexicon,
    config: &TextConfig,
) -> Result<TextFeatureVector> {
    Ok(TextFeatureVector {
        counts: text_counts(transcript, duration, depression, config)?,
        affect: affect_features(transcript, affect, config)?,
    })
}
