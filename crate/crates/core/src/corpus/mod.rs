//! Interview data model, file formats, descriptive statistics and the synthetic corpus.

mod io;
mod stats;
mod synth;
mod types;

pub use io::{
    load_manifest, parse_channel_file, parse_labels, parse_landmark_file, parse_lld_file,
    parse_transcript, write_channel_file, write_labels, write_landmark_file, write_lld_file,
    write_manifest, write_transcript, DEFAULT_LLD_FRAME_PERIOD, MANIFEST_FORMAT_VERSION,
};
pub(crate) use io::{data_lines, read_text, write_text};
pub use stats::{descriptive_stats, mode, quantile_sorted, StatSet, Statistic};
pub use synth::{
    covarep_channel_names, generate_corpus, generate_synthetic_session, profile_items,
    SynthConfig, FEATURE_FILE, LABEL_FILE, LANDMARK_FILE, LLD_FILE, MANIFEST_FILE,
    TRANSCRIPT_FILE,
};
pub use types::{
    valid_frames, ChannelMatrix, FeatureVector, LandmarkFrame, LldFrameSeries, Phq8Labels, Point,
    SessionManifest, Speaker, Split, TranscriptEntry, LANDMARK_COUNT, PHQ8_BINARY_CUTOFF,
    PHQ8_ITEMS,
};
