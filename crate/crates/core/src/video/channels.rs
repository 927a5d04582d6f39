use crate::corpus::{descriptive_stats, ChannelMatrix, FeatureVector, StatSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Descriptive statistics of every AU / gaze / pose channel, concatenated in channel order.
///
/// Output names are `<channel>_<statistic>`.
pub fn channel_statistics<T: Real>(
    channels: &ChannelMatrix<T>,
    stats: &StatSet,
) -> Result<FeatureVector<T>> {
    let mut out = FeatureVector::new();
    for (name, column) in channels.names.iter().zip(&channels.columns) {
        if column.is_empty() {
            return Err(Error::invalid(format!("channel {name} has no frames")));
        }
        out.extend_prefixed(name, descriptive_stats(column, stats)?);
    }
    Ok(out)
}
