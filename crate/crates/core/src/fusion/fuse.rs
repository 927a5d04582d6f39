//! Decision-level fusion of per-modality totals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::predictions::{check_same_sessions, PredictionSet, SCORE_MAX};
use crate::error::{Error, Result};

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionStrategy {
    WeightedMean,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionSpec {
    pub strategy: FusionStrategy,
    /// Per-modality weights; ignored by `Max`. Empty means equal weights.
    pub weights: BTreeMap<String, f64>,
}

impl FusionSpec {
    pub fn max() -> Self {
        Self { strategy: FusionStrategy::Max, weights: BTreeMap::new() }
    }

    pub fn equal_mean() -> Self {
        Self { strategy: FusionStrategy::WeightedMean, weights: BTreeMap::new() }
    }

    pub fn weighted(weights: BTreeMap<String, f64>) -> Result<Self> {
        let spec = Self { strategy: FusionStrategy::WeightedMean, weights };
        spec.validate_weights()?;
        Ok(spec)
    }

    fn validate_weights(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Ok(());
        }
        if let Some((m, w)) = self.weights.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("weight {w} for {m} must be finite and >= 0")));
        }
        let sum: f64 = self.weights.values().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!("fusion weights sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Weight per input set, in input order.
    fn resolve(&self, sets: &[PredictionSet]) -> Result<Vec<f64>> {
        if self.weights.is_empty() {
            return Ok(vec![1.0 / sets.len() as f64; sets.len()]);
        }
        self.validate_weights()?;
        check_same_sessions(
            self.weights.keys().map(String::as_str),
            sets.iter().map(|s| s.modality.as_str()),
        )
        .map_err(|e| Error::invalid(format!("fusion weights and modalities differ: {e}")))?;
        Ok(sets.iter().map(|s| self.weights[&s.modality]).collect())
    }
}

/// `max`, `mean` (equal weights) or `weighted:audio=0.5,text=0.5`.
impl FromStr for FusionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "max" => return Ok(Self::max()),
            "mean" => return Ok(Self::equal_mean()),
            _ => {}
        }
        let body = s
            .strip_prefix("weighted:")
            .ok_or_else(|| Error::invalid(format!("unknown fusion spec {s:?}")))?;
        let mut weights = BTreeMap::new();
        for part in body.split(',') {
            let (m, w) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad fusion weight {part:?}")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad fusion weight {part:?}")))?;
            weights.insert(m.trim().to_string(), w);
        }
        Self::weighted(weights)
    }
}

impl fmt::Display for FusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.strategy, self.weights.is_empty()) {
            (FusionStrategy::Max, _) => f.write_str("max"),
            (FusionStrategy::WeightedMean, true) => f.write_str("mean"),
            (FusionStrategy::WeightedMean, false) => {
                let parts: Vec<String> =
                    self.weights.iter().map(|(m, w)| format!("{m}={w}")).collect();
                write!(f, "weighted:{}", parts.join(","))
            }
        }
    }
}

/// Combines sets covering identical sessions; output is clipped to `[0, 24]`.
pub fn fuse(sets: &[PredictionSet], spec: &FusionSpec) -> Result<PredictionSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::invalid("fusion needs at least one prediction set"))?;
    for s in &sets[1..] {
        check_same_sessions(first.ids(), s.ids())?;
    }
    let weights = match spec.strategy {
        FusionStrategy::WeightedMean => spec.resolve(sets)?,
        FusionStrategy::Max => Vec::new(),
    };
    let scores = first
        .scores
        .keys()
        .map(|id| {
            let values = sets.iter().map(|s| s.scores[id]);
            let v = match spec.strategy {
                FusionStrategy::WeightedMean => values.zip(&weights).map(|(p, w)| p * w).sum(),
                FusionStrategy::Max => values.fold(f64::NEG_INFINITY, f64::max),
            };
            (id.clone(), v.clamp(0.0, SCORE_MAX))
        })
        .collect();
    PredictionSet::new("fused", scores)
}
