//! Deterministic synthetic interview sessions.
//!
//! Each session is a pure function of `(seed, profile)`, where `profile` is the
//! intended PHQ-8 total. Several observable behaviours are tied to the profile so
//! the learners have something to find: blink rate rises, head motion and facial
//! expressiveness shrink, pitch drops, speech slows and the vocabulary darkens.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::io::{
    write_channel_file, write_labels, write_landmark_file, write_lld_file, write_manifest,
    write_transcript,
};
use super::types::{
    ChannelMatrix, LandmarkFrame, LldFrameSeries, Phq8Labels, Point, SessionManifest, Speaker,
    Split, TranscriptEntry, LANDMARK_COUNT,
};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng, rng_stream};
use crate::video::reference_face;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    /// Session length in seconds.
    pub duration: f64,
    pub fps: f64,
    pub lld_period: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            duration: 30.0,
            fps: 30.0,
            lld_period: 0.010,
        }
    }
}

pub const LANDMARK_FILE: &str = "landmarks.csv";
pub const FEATURE_FILE: &str = "features.csv";
pub const LLD_FILE: &str = "lld.csv";
pub const TRANSCRIPT_FILE: &str = "transcript.tsv";
pub const LABEL_FILE: &str = "labels.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

const BLINK_CLOSURE: [f64; 7] = [0.35, 0.75, 1.0, 1.0, 0.8, 0.5, 0.25];
const UPPER_LIDS: [usize; 4] = [38, 39, 44, 45];
const LOWER_LIDS: [usize; 4] = [41, 42, 47, 48];
const LOWER_LIP: [usize; 8] = [56, 57, 58, 59, 60, 66, 67, 68];
const LIP_CORNERS: [usize; 4] = [49, 55, 61, 65];

const AU_CHANNELS: [&str; 20] = [
    "AU01_r", "AU02_r", "AU04_r", "AU05_r", "AU06_r", "AU09_r", "AU10_r", "AU12_r", "AU14_r",
    "AU15_r", "AU17_r", "AU20_r", "AU25_r", "AU26_r", "gaze_angle_x", "gaze_angle_y", "pose_Rx",
    "pose_Ry", "pose_Rz", "pose_Tz",
];

const POSITIVE_WORDS: [&str; 20] = [
    "happy", "joy", "love", "fun", "good", "great", "nice", "glad", "calm", "relaxed", "friends",
    "family", "proud", "hopeful", "excited", "enjoy", "wonderful", "peaceful", "grateful", "music",
];

const NEUTRAL_WORDS: [&str; 30] = [
    "the", "and", "i", "you", "it", "was", "is", "to", "a", "of", "in", "that", "yeah", "um",
    "like", "know", "just", "so", "really", "think", "work", "time", "people", "day", "things",
    "pretty", "well", "school", "job", "because",
];

const PROMPTS: [&str; 6] = [
    "how are you doing today",
    "where are you from originally",
    "how have you been feeling lately",
    "tell me about your family",
    "how easy is it for you to get a good night's sleep",
    "what are you most proud of",
];

/// PHQ-8 items whose total equals `profile`, spread as evenly as possible.
pub fn profile_items(seed: u64, profile: u8) -> Result<[u8; 8]> {
    if profile > 24 {
        return Err(Error::invalid(format!(
            "severity profile {profile} outside 0..=24"
        )));
    }
    let mut order: Vec<usize> = (0..8).collect();
    order.shuffle(&mut rng(derive_seed(seed, "labels")));
    let mut items = [profile / 8; 8];
    for &i in order.iter().take(usize::from(profile % 8)) {
        items[i] += 1;
    }
    Ok(items)
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd.max(1e-12)).expect("finite standard deviation")
}

fn grid(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn severity(profile: u8) -> f64 {
    f64::from(profile) / 24.0
}

/// Generates one session into `dir` and returns its manifest entry (paths relative to `dir`'s parent).
pub fn generate_synthetic_session(
    seed: u64,
    profile: u8,
    dir: &Path,
    session_id: &str,
    split: Split,
    config: &SynthConfig,
) -> Result<SessionManifest> {
    let items = profile_items(seed, profile)?;
    let labels = Phq8Labels::new(items)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let transcript = synth_transcript(seed, profile, config);
    let (frames, success) = synth_landmarks(seed, profile, config);
    let timestamps: Vec<f64> = frames.iter().map(|f| f.timestamp).collect();
    let channels = synth_channels(seed, profile, frames.len());
    let lld = synth_lld(seed, profile, &transcript, config)?;

    write_landmark_file(&dir.join(LANDMARK_FILE), &frames)?;
    write_channel_file(&dir.join(FEATURE_FILE), &timestamps, &success, &channels)?;
    write_lld_file(&dir.join(LLD_FILE), &lld)?;
    write_transcript(&dir.join(TRANSCRIPT_FILE), &transcript)?;
    write_labels(&dir.join(LABEL_FILE), &labels)?;

    let rel = |f: &str| -> PathBuf {
        match dir.file_name() {
            Some(name) => Path::new(name).join(f),
            None => PathBuf::from(f),
        }
    };
    Ok(SessionManifest {
        session_id: session_id.to_string(),
        duration: config.duration,
        landmarks: rel(LANDMARK_FILE),
        features: rel(FEATURE_FILE),
        lld: rel(LLD_FILE),
        transcript: rel(TRANSCRIPT_FILE),
        labels: Some(rel(LABEL_FILE)),
        split,
    })
}

/// Generates `sessions` sessions under `out` plus `manifest.json`; 70 % train, 30 % dev.
pub fn generate_corpus(
    seed: u64,
    sessions: usize,
    out: &Path,
    config: &SynthConfig,
) -> Result<Vec<SessionManifest>> {
    let mut profile_rng = rng(derive_seed(seed, "profiles"));
    let mut manifest = Vec::with_capacity(sessions);
    for i in 0..sessions {
        let profile: u8 = profile_rng.random_range(0..=24);
        let id = format!("S{i:03}");
        let split = if i % 10 < 7 { Split::Train } else { Split::Dev };
        let session_seed = derive_seed(seed, &format!("session/{i}"));
        manifest.push(generate_synthetic_session(
            session_seed,
            profile,
            &out.join(&id),
            &id,
            split,
            config,
        )?);
    }
    write_manifest(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn blink_onsets(r: &mut ChaCha8Rng, profile: u8, n_frames: usize, fps: f64) -> Vec<usize> {
    // 10 to 34 blinks per minute
    let rate = (10.0 + f64::from(profile)) / 60.0 / fps;
    let mut onsets = Vec::new();
    let mut next = 0usize;
    let mut i = 5usize;
    while i + BLINK_CLOSURE.len() < n_frames {
        if i >= next && r.random::<f64>() < rate {
            onsets.push(i);
            next = i + BLINK_CLOSURE.len() + 5;
        }
        i += 1;
    }
    onsets
}

fn synth_landmarks(
    seed: u64,
    profile: u8,
    config: &SynthConfig,
) -> (Vec<LandmarkFrame<f64>>, Vec<bool>) {
    let mut r = rng_stream(seed, 1);
    let sev = severity(profile);
    let reference = reference_face::<f64>();
    let n = (config.duration * config.fps).round() as usize;

    let step = normal(0.9 - 0.7 * sev);
    let jitter = normal(0.25);
    let expressive = 1.0 - 0.7 * sev;
    let drive = normal(0.6);

    let mut closure = vec![0.0; n];
    for onset in blink_onsets(&mut r, profile, n, config.fps) {
        for (k, c) in BLINK_CLOSURE.iter().enumerate() {
            closure[onset + k] = *c;
        }
    }

    let (mut tx, mut ty) = (0.0_f64, 0.0_f64);
    let (mut mouth, mut brow, mut smile) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut frames = Vec::with_capacity(n);
    let mut success = Vec::with_capacity(n);
    for i in 0..n {
        tx = 0.98 * tx + step.sample(&mut r);
        ty = 0.98 * ty + step.sample(&mut r);
        mouth = 0.9 * mouth + drive.sample(&mut r);
        brow = 0.95 * brow + 0.5 * drive.sample(&mut r);
        smile = 0.97 * smile + 0.4 * drive.sample(&mut r);
        let valid = r.random::<f64>() >= 0.01;

        let (gx, gy) = (grid(tx), grid(ty));
        let mut points = reference;
        for (idx, p) in points.iter_mut().enumerate() {
            let id = idx + 1;
            let eye = (37..=48).contains(&id);
            if !eye {
                p.x += grid(jitter.sample(&mut r));
                p.y += grid(jitter.sample(&mut r));
            }
            if LOWER_LIP.contains(&id) {
                p.y += grid(expressive * 3.0 * mouth.abs());
            }
            if LIP_CORNERS.contains(&id) {
                let dir = if id == 49 || id == 61 { -1.0 } else { 1.0 };
                p.x += grid(dir * expressive * 2.0 * smile.max(0.0));
                p.y += grid(expressive * 1.5 * mouth.abs());
            }
            if (18..=27).contains(&id) {
                p.y -= grid(expressive * 2.0 * brow.max(0.0));
            }
            if UPPER_LIDS.contains(&id) {
                p.y += grid(5.0 * closure[i]);
            }
            if LOWER_LIDS.contains(&id) {
                p.y -= grid(closure[i]);
            }
            p.x += gx;
            p.y += gy;
        }
        if !valid {
            points = [Point::default(); LANDMARK_COUNT];
        }
        frames.push(LandmarkFrame {
            frame_index: i as u64,
            timestamp: i as f64 / config.fps,
            confidence: if valid { 0.95 } else { 0.0 },
            valid,
            points,
        });
        success.push(valid);
    }
    (frames, success)
}

fn synth_channels(seed: u64, profile: u8, n: usize) -> ChannelMatrix<f64> {
    let mut r = rng_stream(seed, 2);
    let sev = severity(profile);
    let noise = normal(1.0);
    let mut columns = Vec::with_capacity(AU_CHANNELS.len());
    for (c, name) in AU_CHANNELS.iter().enumerate() {
        let (base, scale) = match *name {
            "AU12_r" => (1.5 - 1.2 * sev, 0.4 - 0.2 * sev),
            "AU06_r" => (1.0 - 0.7 * sev, 0.3),
            "AU04_r" => (0.2 + 1.0 * sev, 0.3),
            "AU15_r" => (0.2 + 0.6 * sev, 0.2),
            "gaze_angle_y" => (0.05 + 0.25 * sev, 0.05),
            "pose_Rx" => (0.1 * sev, 0.05 - 0.03 * sev),
            "pose_Tz" => (600.0, 10.0),
            _ => (0.3 + 0.05 * c as f64, 0.2),
        };
        let is_au = name.starts_with("AU");
        let mut state = 0.0;
        let col = (0..n)
            .map(|_| {
                state = 0.9 * state + 0.45 * noise.sample(&mut r);
                let v = base + scale * state;
                if is_au {
                    v.clamp(0.0, 5.0)
                } else {
                    v
                }
            })
            .collect();
        columns.push(col);
    }
    ChannelMatrix {
        names: AU_CHANNELS.iter().map(|s| s.to_string()).collect(),
        columns,
    }
}

/// The 74 COVAREP descriptor channel names.
pub fn covarep_channel_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "F0", "VUV", "NAQ", "QOQ", "H1H2", "PSP", "MDQ", "peakSlope", "Rd", "Rd_conf", "creak",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend((0..25).map(|i| format!("MCEP_{i}")));
    names.extend((0..25).map(|i| format!("HMPDM_{i}")));
    names.extend((0..13).map(|i| format!("HMPDD_{i}")));
    names
}

fn synth_lld(
    seed: u64,
    profile: u8,
    transcript: &[TranscriptEntry],
    config: &SynthConfig,
) -> Result<LldFrameSeries<f64>> {
    let mut r = rng_stream(seed, 3);
    let sev = severity(profile);
    let names = covarep_channel_names();
    let n = (config.duration / config.lld_period).round() as usize;
    let noise = normal(1.0);

    let speaking: Vec<bool> = (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * config.lld_period;
            transcript.iter().any(|e| {
                e.speaker == Speaker::Participant && e.start_time <= t && t < e.stop_time
            })
        })
        .collect();
    let voiced: Vec<bool> = speaking
        .iter()
        .map(|&s| s && r.random::<f64>() < 0.8)
        .collect();

    let mut values = Vec::with_capacity(names.len());
    for (c, name) in names.iter().enumerate() {
        let mut state = 0.0;
        let k = c as f64;
        let col: Vec<f64> = (0..n)
            .map(|i| {
                state = 0.95 * state + 0.3 * noise.sample(&mut r);
                let v = voiced[i];
                match name.as_str() {
                    "F0" if v => 200.0 - 60.0 * sev + (25.0 - 15.0 * sev) * state,
                    "F0" => 0.0,
                    "VUV" => f64::from(u8::from(v)),
                    "NAQ" => 0.1 + 0.1 * sev + 0.02 * state,
                    "QOQ" => 0.4 - 0.1 * sev + 0.05 * state,
                    "peakSlope" => -0.2 - 0.1 * sev + 0.03 * state,
                    _ if speaking[i] => {
                        (k * 0.37).sin() + 0.3 * sev * (k * 0.11).cos() + 0.2 * state
                    }
                    _ => 0.1 * (k * 0.37).sin() + 0.05 * state,
                }
            })
            .collect();
        values.push(col);
    }
    LldFrameSeries::new(config.lld_period, names, values, Some(voiced))
}

fn synth_transcript(seed: u64, profile: u8, config: &SynthConfig) -> Vec<TranscriptEntry> {
    let mut r = rng_stream(seed, 4);
    let sev = severity(profile);
    let depression: Vec<&str> = crate::text::default_depression_words().collect();
    let length = normal(3.0);

    let mut entries = Vec::new();
    let mut t = 0.5;
    let mut prompt = 0;
    while t < config.duration - 4.0 {
        let ask = 1.5 + 1.5 * r.random::<f64>();
        entries.push(TranscriptEntry {
            start_time: t,
            stop_time: t + ask,
            speaker: Speaker::Interviewer,
            tokens: PROMPTS[prompt % PROMPTS.len()]
                .split_whitespace()
                .map(str::to_string)
                .collect(),
        });
        prompt += 1;
        t += ask + 0.3 + 0.5 * r.random::<f64>();

        let words = (12.0 - 8.0 * sev + length.sample(&mut r)).round().max(1.0) as usize;
        let mut tokens = Vec::with_capacity(words + 1);
        for _ in 0..words {
            let u = r.random::<f64>();
            let word = if u < 0.03 + 0.3 * sev {
                depression[r.random_range(0..depression.len())]
            } else if u < 0.3 {
                POSITIVE_WORDS[r.random_range(0..POSITIVE_WORDS.len())]
            } else {
                NEUTRAL_WORDS[r.random_range(0..NEUTRAL_WORDS.len())]
            };
            tokens.push(word.to_string());
        }
        if r.random::<f64>() < 0.35 - 0.3 * sev {
            tokens.push("<laughter>".to_string());
        }
        let speak = (words as f64 * (0.35 + 0.25 * sev)).min(config.duration - 0.5 - t);
        if speak <= 0.05 {
            break;
        }
        entries.push(TranscriptEntry {
            start_time: t,
            stop_time: t + speak,
            speaker: Speaker::Participant,
            tokens,
        });
        t += speak + 0.4 + 0.6 * r.random::<f64>();
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn items_sum_to_profile() {
        for p in 0..=24u8 {
            let items = profile_items(9, p).unwrap();
            assert_eq!(items.iter().map(|&v| u32::from(v)).sum::<u32>(), u32::from(p));
            assert!(items.iter().all(|&v| v <= 3));
        }
        assert!(profile_items(0, 25).is_err());
    }

    #[test]
    fn covarep_has_74_channels() {
        assert_eq!(covarep_channel_names().len(), 74);
    }

    #[test]
    fn transcript_stays_inside_session() {
        let cfg = SynthConfig::default();
        let t = synth_transcript(3, 12, &cfg);
        assert!(t.iter().any(|e| e.speaker == Speaker::Participant));
        assert!(t.iter().all(|e| e.stop_time > e.start_time && e.stop_time <= cfg.duration));
        assert!(t.windows(2).all(|w| w[1].start_time >= w[0].stop_time));
    }
}
