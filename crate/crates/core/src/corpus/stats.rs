//! Descriptive statistics shared by the video and audio feature extractors.
//!
//! Conventions: variance and standard deviation use the `n - 1` denominator,
//! skewness and kurtosis are standardized central moments (kurtosis is not
//! excess), the mode is taken after rounding to four decimals with ties going
//! to the smallest value, and quantiles interpolate linearly between order
//! statistics. A constant series reports zero skewness and kurtosis.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::types::FeatureVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Min,
    Max,
    Mean,
    Mode,
    Median,
    Range,
    MeanDeviation,
    Variance,
    StdDev,
    Skewness,
    Kurtosis,
    PeakToRms,
    RmsLevel,
    InterquartileRange,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Min => "min",
            Statistic::Max => "max",
            Statistic::Mean => "mean",
            Statistic::Mode => "mode",
            Statistic::Median => "median",
            Statistic::Range => "range",
            Statistic::MeanDeviation => "meandev",
            Statistic::Variance => "var",
            Statistic::StdDev => "std",
            Statistic::Skewness => "skew",
            Statistic::Kurtosis => "kurt",
            Statistic::PeakToRms => "peak2rms",
            Statistic::RmsLevel => "rms",
            Statistic::InterquartileRange => "iqr",
        }
    }
}

/// A non-empty list of distinct statistics, evaluated in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatSet(Vec<Statistic>);

impl StatSet {
    pub fn new(stats: Vec<Statistic>) -> Result<Self> {
        if stats.is_empty() {
            return Err(Error::invalid("statistic set is empty"));
        }
        let mut seen = HashSet::new();
        for s in &stats {
            if !seen.insert(*s) {
                return Err(Error::invalid(format!(
                    "statistic {} requested twice",
                    s.name()
                )));
            }
        }
        Ok(Self(stats))
    }

    /// The eleven descriptors computed over AU, gaze and pose channels.
    pub fn video11() -> Self {
        use Statistic::*;
        Self(vec![
            Min,
            Max,
            Mean,
            Mode,
            Median,
            Range,
            MeanDeviation,
            Variance,
            StdDev,
            Skewness,
            Kurtosis,
        ])
    }

    /// The nine descriptors computed over low-level audio descriptors.
    pub fn audio9() -> Self {
        use Statistic::*;
        Self(vec![
            Mean,
            Min,
            Skewness,
            Kurtosis,
            StdDev,
            Median,
            PeakToRms,
            RmsLevel,
            InterquartileRange,
        ])
    }

    pub fn stats(&self) -> &[Statistic] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Evaluates `stats` over `series`, returning one named value per statistic.
pub fn descriptive_stats<T: Real>(series: &[T], stats: &StatSet) -> Result<FeatureVector<T>> {
    let summary = Summary::new(series)?;
    let mut out = FeatureVector::new();
    for &s in stats.stats() {
        out.push(s.name(), summary.get(s));
    }
    Ok(out)
}

/// Most frequent value after rounding to four decimals; ties go to the smallest value.
pub fn mode<T: Real>(series: &[T]) -> Result<T> {
    if series.is_empty() {
        return Err(Error::invalid("mode of an empty series"));
    }
    let mut keys: Vec<i64> = series
        .iter()
        .map(|x| (x.as_f64() * 1e4).round() as i64)
        .collect();
    keys.sort_unstable();
    let (mut best, mut best_count) = (keys[0], 0usize);
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        if j - i > best_count {
            best = keys[i];
            best_count = j - i;
        }
        i = j;
    }
    Ok(T::lit(best as f64 / 1e4))
}

/// Linear-interpolation quantile of an ascending-sorted slice.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: f64) -> T {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = T::lit(h - lo as f64);
    match sorted.get(lo + 1) {
        Some(&hi) => sorted[lo] + frac * (hi - sorted[lo]),
        None => sorted[lo],
    }
}

struct Summary<T> {
    n: T,
    min: T,
    max: T,
    mean: T,
    median: T,
    mode: T,
    mean_abs_dev: T,
    m2: T,
    m3: T,
    m4: T,
    rms: T,
    max_abs: T,
    iqr: T,
}

impl<T: Real> Summary<T> {
    fn new(series: &[T]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::invalid("descriptive statistics of an empty series"));
        }
        if series.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("series contains non-finite values"));
        }
        let n = T::from_usize_lossy(series.len());
        let mut sorted = series.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let min = sorted[0];
        let max = sorted[sorted.len() - 1];
        let mean = series.iter().copied().sum::<T>() / n;

        let (mut abs, mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero(), T::zero());
        if max > min {
            for &x in series {
                let d = x - mean;
                let d2 = d * d;
                abs += d.abs();
                m2 += d2;
                m3 += d2 * d;
                m4 += d2 * d2;
            }
        }
        let sq: T = series.iter().map(|&x| x * x).sum();
        Ok(Self {
            n,
            min,
            max,
            mean,
            median: quantile_sorted(&sorted, 0.5),
            mode: mode(series)?,
            mean_abs_dev: abs / n,
            m2: m2 / n,
            m3: m3 / n,
            m4: m4 / n,
            rms: (sq / n).sqrt(),
            max_abs: min.abs().max(max.abs()),
            iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        })
    }

    fn sample_variance(&self) -> T {
        if self.n > T::one() {
            self.m2 * self.n / (self.n - T::one())
        } else {
            T::zero()
        }
    }

    fn get(&self, stat: Statistic) -> T {
        let constant = self.m2 == T::zero();
        match stat {
            Statistic::Min => self.min,
            Statistic::Max => self.max,
            Statistic::Mean => self.mean,
            Statistic::Mode => self.mode,
            Statistic::Median => self.median,
            Statistic::Range => self.max - self.min,
            Statistic::MeanDeviation => self.mean_abs_dev,
            Statistic::Variance => self.sample_variance(),
            Statistic::StdDev => self.sample_variance().sqrt(),
            Statistic::Skewness if constant => T::zero(),
            Statistic::Skewness => self.m3 / self.m2.powf(T::lit(1.5)),
            Statistic::Kurtosis if constant => T::zero(),
            Statistic::Kurtosis => self.m4 / (self.m2 * self.m2),
            Statistic::PeakToRms if self.rms > T::zero() => self.max_abs / self.rms,
            Statistic::PeakToRms => T::zero(),
            Statistic::RmsLevel => self.rms,
            Statistic::InterquartileRange => self.iqr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Statistic::*;

    #[test]
    fn basic_arithmetic() {
        let set = StatSet::new(vec![Mean, Median, Min, Max, Range]).unwrap();
        let v = descriptive_stats(&[1.0, 2.0, 3.0, 4.0, 5.0], &set).unwrap();
        assert_eq!(v.values, vec![3.0, 3.0, 1.0, 5.0, 4.0]);
        assert_eq!(v.names, vec!["mean", "median", "min", "max", "range"]);
    }

    #[test]
    fn constant_series_has_zero_shape_moments() {
        let v = descriptive_stats(&[7.0, 7.0, 7.0], &StatSet::video11()).unwrap();
        assert_eq!(v.get("var"), Some(0.0));
        assert_eq!(v.get("skew"), Some(0.0));
        assert_eq!(v.get("kurt"), Some(0.0));
        assert_eq!(v.get("mode"), Some(7.0));
    }

    #[test]
    fn constant_audio_channel() {
        let v = descriptive_stats(&[5.0_f32; 10], &StatSet::audio9()).unwrap();
        assert_eq!(v.get("mean"), Some(5.0));
        assert_eq!(v.get("min"), Some(5.0));
        assert_eq!(v.get("std"), Some(0.0));
        assert_eq!(v.get("rms"), Some(5.0));
        assert_eq!(v.get("peak2rms"), Some(1.0));
    }

    #[test]
    fn all_zero_series_has_zero_peak_to_rms() {
        let v = descriptive_stats(&[0.0; 4], &StatSet::audio9()).unwrap();
        assert_eq!(v.get("peak2rms"), Some(0.0));
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(descriptive_stats::<f64>(&[], &StatSet::video11()).is_err());
    }

    #[test]
    fn mode_rounds_and_prefers_smallest() {
        assert_eq!(mode(&[1.00001, 1.00002, 2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(mode(&[3.0, 1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(mode(&[3.0, 3.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn interquartile_range_interpolates() {
        // type-7: q1 = 1.75, q3 = 3.25 for 1..=4
        let set = StatSet::new(vec![InterquartileRange]).unwrap();
        let v = descriptive_stats(&[4.0_f64, 1.0, 3.0, 2.0], &set).unwrap();
        assert!((v.values[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn stat_set_rejects_duplicates_and_empty() {
        assert!(StatSet::new(vec![]).is_err());
        assert!(StatSet::new(vec![Mean, Mean]).is_err());
        assert_eq!(StatSet::video11().len(), 11);
        assert_eq!(StatSet::audio9().len(), 9);
    }
}
