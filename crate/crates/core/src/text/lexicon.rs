use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::corpus::{data_lines, read_text};
use crate::error::{Error, Result};

const DEFAULT_DEPRESSION: &str = include_str!("../../data/depression_lexicon.txt");
const DEFAULT_AFFECT: &str = include_str!("../../data/affect_lexicon.csv");

/// Words of the bundled depression lexicon.
pub fn default_depression_words() -> impl Iterator<Item = &'static str> {
    data_lines(DEFAULT_DEPRESSION).map(|(_, l)| l.trim())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepressionLexicon {
    words: BTreeSet<String>,
}

impl DepressionLexicon {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::invalid("depression lexicon is empty"));
        }
        Ok(Self { words })
    }

    pub fn bundled() -> Self {
        Self::new(default_depression_words()).expect("bundled lexicon is non-empty")
    }

    /// One word per line; `#` lines are comments.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::new(data_lines(&text).map(|(_, l)| l.to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Pleasure, arousal and dominance (mean, sd) plus word frequency.
pub type AffectRatings = [f64; 7];

pub const AFFECT_NAMES: [&str; 7] = [
    "pleasure_mean",
    "pleasure_sd",
    "arousal_mean",
    "arousal_sd",
    "dominance_mean",
    "dominance_sd",
    "frequency",
];

#[derive(Clone, Debug, PartialEq)]
pub struct AffectLexicon {
    ratings: BTreeMap<String, AffectRatings>,
}

impl AffectLexicon {
    pub fn new(ratings: BTreeMap<String, AffectRatings>) -> Result<Self> {
        if ratings.is_empty() {
            return Err(Error::invalid("affect lexicon is empty"));
        }
        let mut out = BTreeMap::new();
        for (w, r) in ratings {
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite rating for '{w}'")));
            }
            out.insert(w.to_lowercase(), r);
        }
        Ok(Self { ratings: out })
    }

    /// Stand-in ratings shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_AFFECT, Path::new("affect_lexicon.csv"))
            .expect("bundled affect lexicon is well formed")
    }

    /// CSV rows `word, 7 ratings`; a header row is allowed.
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut ratings = BTreeMap::new();
        for (n, (row, line)) in data_lines(text).enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 8 {
                return Err(Error::parse(path, row, "expected word and 7 ratings"));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                fields[1..].iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => {
                    let mut r = [0.0; 7];
                    r.copy_from_slice(&v);
                    ratings.insert(fields[0].to_string(), r);
                }
                Err(_) if n == 0 => continue,
                Err(_) => return Err(Error::parse(path, row, "non-numeric rating")),
            }
        }
        Self::new(ratings)
    }

    pub fn get(&self, word: &str) -> Option<&AffectRatings> {
        self.ratings.get(word)
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}
