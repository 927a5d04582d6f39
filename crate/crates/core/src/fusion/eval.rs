//! RMSE / MAE scoring and exhaustive fusion-weight search.

use std::collections::BTreeMap;

use super::fuse::{fuse, FusionSpec};
use super::predictions::{check_same_sessions, PredictionSet};
use crate::corpus::Phq8Labels;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub rmse: f64,
    pub mae: f64,
    /// Prediction minus truth per session.
    pub residuals: BTreeMap<String, f64>,
}

impl EvalReport {
    pub fn count(&self) -> usize {
        self.residuals.len()
    }

    pub fn from_residuals(residuals: BTreeMap<String, f64>) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::invalid("no sessions to evaluate"));
        }
        let n = residuals.len() as f64;
        let mse = residuals.values().map(|r| r * r).sum::<f64>() / n;
        let mae = residuals.values().map(|r| r.abs()).sum::<f64>() / n;
        Ok(Self { rmse: mse.sqrt(), mae, residuals })
    }

    pub fn summary(&self) -> String {
        format!("RMSE={:.6} MAE={:.6}", self.rmse, self.mae)
    }
}

/// Scores predicted totals against labelled totals over identical session sets.
pub fn evaluate(predictions: &PredictionSet, truth: &BTreeMap<String, Phq8Labels>) -> Result<EvalReport> {
    check_same_sessions(predictions.ids(), truth.keys().map(String::as_str))?;
    let residuals = predictions
        .scores
        .iter()
        .map(|(id, &p)| (id.clone(), p - f64::from(truth[id].total())))
        .collect();
    EvalReport::from_residuals(residuals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightRow {
    /// One weight per input set, in input order.
    pub weights: Vec<f64>,
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSearch {
    pub best: FusionSpec,
    pub best_row: WeightRow,
    pub table: Vec<WeightRow>,
}

impl WeightSearch {
    pub fn to_csv(&self, preamble: &str, modalities: &[String]) -> String {
        let mut out = String::from(preamble);
        let cols: Vec<String> = modalities.iter().map(|m| format!("w_{m}")).collect();
        out.push_str(&format!("{},rmse,mae\n", cols.join(",")));
        for row in &self.table {
            let w: Vec<String> = row.weights.iter().map(|w| format!("{w:.4}")).collect();
            out.push_str(&format!("{},{:.6},{:.6}\n", w.join(","), row.rmse, row.mae));
        }
        out
    }
}

/// All ways to split `total` units over `parts` slots, lexicographically ascending.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Evaluates every weight vector on the simplex lattice with spacing `step`.
///
/// Best row: lowest RMSE, then lowest MAE, then lexicographically smallest
/// weights (values within 1e-12 relative count as ties).
pub fn weight_search(
    sets: &[PredictionSet],
    truth: &BTreeMap<String, Phq8Labels>,
    step: f64,
) -> Result<WeightSearch> {
    if sets.len() < 2 {
        return Err(Error::invalid("weight search needs at least two prediction sets"));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::invalid(format!("grid step {step} outside (0, 1]")));
    }
    let units = (1.0 / step).round();
    if (units * step - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("grid step {step} does not divide 1")));
    }
    let units = units as usize;
    let names: Vec<String> = sets.iter().map(|s| s.modality.clone()).collect();
    let mut table = Vec::new();
    let mut best: Option<usize> = None;
    for parts in compositions(units, sets.len()) {
        let weights: Vec<f64> = parts.iter().map(|&p| p as f64 / units as f64).collect();
        let spec = FusionSpec::weighted(names.iter().cloned().zip(weights.iter().copied()).collect())?;
        let report = evaluate(&fuse(sets, &spec)?, truth)?;
        let row = WeightRow { weights, rmse: report.rmse, mae: report.mae };
        let better = match best {
            None => true,
            Some(b) => {
                let cur: &WeightRow = &table[b];
                if !nearly_equal(row.rmse, cur.rmse) {
                    row.rmse < cur.rmse
                } else {
                    !nearly_equal(row.mae, cur.mae) && row.mae < cur.mae
                }
            }
        };
        table.push(row);
        if better {
            best = Some(table.len() - 1);
        }
    }
    let best_row = table[best.expect("at least one composition")].clone();
    let best = FusionSpec::weighted(names.into_iter().zip(best_row.weights.iter().copied()).collect())?;
    Ok(WeightSearch { best, best_row, table })
}
