//! Per-channel statistics and DCT coefficients over participant frames.

use crate::corpus::{descriptive_stats, FeatureVector, LldFrameSeries, StatSet, TranscriptEntry};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::dct::{dct2_prefix, DEFAULT_DCT_COEFFS};
use super::mask::{participant_mask, ParticipantMask};

#[derive(Clone, Debug, PartialEq)]
pub struct AudioConfig {
    pub stats: StatSet,
    pub dct_coeffs: usize,
    /// Drop unvoiced frames from F0-family channels (names starting with `F0`).
    pub voiced_only_f0: bool,
}

impl Default for AudioConfig {
    fn default() -> Self {
        Self {
            stats: StatSet::audio9(),
            dct_coeffs: DEFAULT_DCT_COEFFS,
            voiced_only_f0: false,
        }
    }
}

fn is_f0_channel(name: &str) -> bool {
    name.get(..2).is_some_and(|p| p.eq_ignore_ascii_case("f0"))
}

fn masked_channel<T: Real>(
    series: &LldFrameSeries<T>,
    channel: usize,
    mask: &ParticipantMask,
    voiced_only: bool,
) -> Vec<T> {
    series.values[channel]
        .iter()
        .zip(&mask.selected)
        .zip(&series.voiced)
        .filter(|((_, &m), &v)| m && (v || !voiced_only))
        .map(|((&x, _), _)| x)
        .collect()
}

fn check_mask<T: Real>(series: &LldFrameSeries<T>, mask: &ParticipantMask) -> Result<()> {
    if mask.selected.len() != series.frame_count() {
        return Err(Error::invalid(format!(
            "mask covers {} frames but the series has {}",
            mask.selected.len(),
            series.frame_count()
        )));
    }
    Ok(())
}

/// Statistics of every channel over masked frames, names `<channel>_<stat>`.
pub fn lld_statistics<T: Real>(
    series: &LldFrameSeries<T>,
    mask: &ParticipantMask,
    config: &AudioConfig,
) -> Result<FeatureVector<T>> {
    check_mask(series, mask)?;
    let mut out = FeatureVector::new();
    for (c, name) in series.channels.iter().enumerate() {
        let x = masked_channel(series, c, mask, config.voiced_only_f0 && is_f0_channel(name));
        if x.len() < 2 {
            return Err(Error::invalid(format!(
                "channel {name}: {} selected frames, need at least 2",
                x.len()
            )));
        }
        out.extend_prefixed(name, descriptive_stats(&x, &config.stats)?);
    }
    Ok(out)
}

/// Leading DCT-II coefficients of every masked channel, names `<channel>_dct<k>`.
pub fn dct_features<T: Real>(
    series: &LldFrameSeries<T>,
    mask: &ParticipantMask,
    config: &AudioConfig,
) -> Result<FeatureVector<T>> {
    check_mask(series, mask)?;
    let mut out = FeatureVector::new();
    for (c, name) in series.channels.iter().enumerate() {
        let x = masked_channel(series, c, mask, config.voiced_only_f0 && is_f0_channel(name));
        if x.is_empty() {
            return Err(Error::invalid(format!("channel {name}: no selected frames")));
        }
        for (k, v) in dct2_prefix(&x, config.dct_coeffs).into_iter().enumerate() {
            out.push(format!("{name}_dct{k}"), v);
        }
    }
    Ok(out)
}

/// Per channel: statistics followed by DCT coefficients.
pub fn audio_feature_vector<T: Real>(
    series: &LldFrameSeries<T>,
    transcript: &[TranscriptEntry],
    config: &AudioConfig,
) -> Result<FeatureVector<T>> {
    let mask = participant_mask(transcript, series)?;
    let stats = lld_statistics(series, &mask, config)?;
    let dct = dct_features(series, &mask, config)?;
    let (ns, nd) = (config.stats.len(), config.dct_coeffs);
    let mut out = FeatureVector::new();
    for c in 0..series.channels.len() {
        for i in c * ns..(c + 1) * ns {
            out.push(stats.names[i].clone(), stats.values[i]);
        }
        for i in c * nd..(c + 1) * nd {
            out.push(dct.names[i].clone(), dct.values[i]);
        }
    }
    Ok(out)
}
