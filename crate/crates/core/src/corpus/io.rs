//! Readers and writers for the per-session interview files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::types::{
    ChannelMatrix, LandmarkFrame, LldFrameSeries, Phq8Labels, Point, SessionManifest, Speaker,
    TranscriptEntry, LANDMARK_COUNT,
};
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_LLD_FRAME_PERIOD: f64 = 0.010;

const LANDMARK_COLUMNS: usize = 4 + 2 * LANDMARK_COUNT;
const TIMESTAMP_NAMES: [&str; 4] = ["timestamp", "time", "frametime", "frame_time"];
const CHANNEL_META: [&str; 4] = ["frame", "timestamp", "confidence", "success"];

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

pub(crate) fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_f64(path: &Path, row: usize, field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::parse(path, row, format!("{what}: '{field}' is not a number")))
}

fn looks_like_header(first_field: &str) -> bool {
    first_field.trim().parse::<f64>().is_err()
}

/// Parses a per-frame 2-D landmark CSV (`frame, timestamp, confidence, success, x1..x68, y1..y68`).
pub fn parse_landmark_file(path: &Path) -> Result<Vec<LandmarkFrame<f64>>> {
    let text = read_text(path)?;
    let mut frames: Vec<LandmarkFrame<f64>> = Vec::new();
    for (n, (row, line)) in data_lines(&text).enumerate() {
        let fields = split_fields(line);
        if n == 0 && looks_like_header(fields[0]) {
            continue;
        }
        if fields.len() != LANDMARK_COLUMNS {
            return Err(Error::parse(
                path,
                row,
                format!("expected {LANDMARK_COLUMNS} columns, found {}", fields.len()),
            ));
        }
        let frame_index = parse_f64(path, row, fields[0], "frame index")?;
        let timestamp = parse_f64(path, row, fields[1], "timestamp")?;
        let confidence = parse_f64(path, row, fields[2], "confidence")?;
        let success = parse_f64(path, row, fields[3], "success flag")?;
        let mut points = [Point::default(); LANDMARK_COUNT];
        for (i, p) in points.iter_mut().enumerate() {
            p.x = parse_f64(path, row, fields[4 + i], "x coordinate")?;
            p.y = parse_f64(path, row, fields[4 + LANDMARK_COUNT + i], "y coordinate")?;
        }
        if let Some(prev) = frames.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::parse(
                    path,
                    row,
                    format!(
                        "timestamp {timestamp} does not increase (previous {})",
                        prev.timestamp
                    ),
                ));
            }
        }
        frames.push(LandmarkFrame {
            frame_index: frame_index as u64,
            timestamp,
            confidence,
            valid: success != 0.0,
            points,
        });
    }
    if frames.is_empty() {
        return Err(Error::parse(path, 0, "no landmark frames"));
    }
    Ok(frames)
}

pub fn write_landmark_file(path: &Path, frames: &[LandmarkFrame<f64>]) -> Result<()> {
    let mut out = String::from("frame,timestamp,confidence,success");
    for i in 1..=LANDMARK_COUNT {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=LANDMARK_COUNT {
        let _ = write!(out, ",y{i}");
    }
    out.push('\n');
    for f in frames {
        let _ = write!(
            out,
            "{},{:.3},{:.2},{}",
            f.frame_index,
            f.timestamp,
            f.confidence,
            u8::from(f.valid)
        );
        for p in &f.points {
            let _ = write!(out, ",{:.2}", p.x);
        }
        for p in &f.points {
            let _ = write!(out, ",{:.2}", p.y);
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Parses a transcript with tab- or comma-separated `start, stop, speaker, text` rows.
///
/// The separator is detected from the first line. Entries are returned sorted by start time.
pub fn parse_transcript(path: &Path) -> Result<Vec<TranscriptEntry>> {
    let text = read_text(path)?;
    let sep = match data_lines(&text).next() {
        Some((_, l)) if l.contains('\t') => '\t',
        Some(_) => ',',
        None => return Err(Error::parse(path, 0, "empty transcript")),
    };
    let mut entries = Vec::new();
    for (n, (row, line)) in data_lines(&text).enumerate() {
        let fields: Vec<&str> = line.splitn(4, sep).map(str::trim).collect();
        if n == 0 && looks_like_header(fields[0]) {
            continue;
        }
        if fields.len() < 3 {
            return Err(Error::parse(
                path,
                row,
                "expected start, stop, speaker and text",
            ));
        }
        let start_time = parse_f64(path, row, fields[0], "start time")?;
        let stop_time = parse_f64(path, row, fields[1], "stop time")?;
        if stop_time <= start_time {
            return Err(Error::parse(
                path,
                row,
                format!("stop time {stop_time} is not after start time {start_time}"),
            ));
        }
        entries.push(TranscriptEntry {
            start_time,
            stop_time,
            speaker: Speaker::from_label(fields[2]),
            tokens: fields
                .get(3)
                .map(|t| t.split_whitespace().map(str::to_string).collect())
                .unwrap_or_default(),
        });
    }
    entries.sort_by(|a, b| a.start_time.total_cmp(&b.start_time));
    Ok(entries)
}

pub fn write_transcript(path: &Path, entries: &[TranscriptEntry]) -> Result<()> {
    let mut out = String::from("start_time\tstop_time\tspeaker\tvalue\n");
    for e in entries {
        let speaker = match e.speaker {
            Speaker::Participant => "Participant",
            Speaker::Interviewer => "Ellie",
        };
        let _ = writeln!(
            out,
            "{:.3}\t{:.3}\t{}\t{}",
            e.start_time,
            e.stop_time,
            speaker,
            e.text()
        );
    }
    write_text(path, &out)
}

fn parse_named_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 0, "empty file"))?;
    let names: Vec<String> = split_fields(header).into_iter().map(str::to_string).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(Error::parse(path, 1, "empty column name in header"));
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (row, line) in lines {
        let fields = split_fields(line);
        if fields.len() != names.len() {
            return Err(Error::parse(
                path,
                row,
                format!("expected {} columns, found {}", names.len(), fields.len()),
            ));
        }
        for (col, field) in columns.iter_mut().zip(&fields) {
            col.push(parse_f64(path, row, field, "value")?);
        }
    }
    if columns.first().is_none_or(Vec::is_empty) {
        return Err(Error::parse(path, 0, "no data rows"));
    }
    Ok((names, columns))
}

/// Parses a low-level descriptor CSV whose one-line header names the channels.
///
/// A leading timestamp column is optional; when present it determines the frame
/// period, otherwise 10 ms is assumed. A `VUV` channel, when present, supplies the
/// voicing flags and stays in the channel list.
pub fn parse_lld_file(path: &Path) -> Result<LldFrameSeries<f64>> {
    let (mut names, mut columns) = parse_named_columns(path)?;
    let mut frame_period = DEFAULT_LLD_FRAME_PERIOD;
    if TIMESTAMP_NAMES.contains(&names[0].to_ascii_lowercase().as_str()) {
        let times = columns.remove(0);
        names.remove(0);
        if times.len() >= 2 {
            frame_period = times[1] - times[0];
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::parse(path, 0, "timestamps are not strictly increasing"));
        }
    }
    if names.is_empty() {
        return Err(Error::parse(path, 1, "no descriptor channels"));
    }
    let voiced = names
        .iter()
        .position(|n| n.eq_ignore_ascii_case("vuv"))
        .map(|i| columns[i].iter().map(|&v| v > 0.5).collect());
    LldFrameSeries::new(frame_period, names, columns, voiced)
}

pub fn write_lld_file(path: &Path, series: &LldFrameSeries<f64>) -> Result<()> {
    let mut out = series.channels.join(",");
    out.push('\n');
    for i in 0..series.frame_count() {
        for (c, col) in series.values.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.4}", col[i]);
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Parses a named-column AU / gaze / pose file.
///
/// Columns `frame`, `timestamp`, `confidence` and `success` are bookkeeping; rows
/// whose `success` is 0 are dropped.
pub fn parse_channel_file(path: &Path) -> Result<ChannelMatrix<f64>> {
    let (names, columns) = parse_named_columns(path)?;
    let success = names
        .iter()
        .position(|n| n.eq_ignore_ascii_case("success"))
        .map(|i| columns[i].clone());
    let keep = |i: usize| success.as_ref().is_none_or(|s| s[i] != 0.0);
    let mut out = ChannelMatrix {
        names: Vec::new(),
        columns: Vec::new(),
    };
    for (name, col) in names.into_iter().zip(columns) {
        if CHANNEL_META.contains(&name.to_ascii_lowercase().as_str()) {
            continue;
        }
        out.columns.push(
            col.into_iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, v)| v)
                .collect(),
        );
        out.names.push(name);
    }
    if out.names.is_empty() {
        return Err(Error::parse(path, 1, "no feature channels"));
    }
    Ok(out)
}

pub fn write_channel_file(
    path: &Path,
    timestamps: &[f64],
    success: &[bool],
    channels: &ChannelMatrix<f64>,
) -> Result<()> {
    let mut out = String::from("frame,timestamp,confidence,success");
    for n in &channels.names {
        let _ = write!(out, ",{n}");
    }
    out.push('\n');
    for (i, t) in timestamps.iter().enumerate() {
        let _ = write!(out, "{},{:.3},0.95,{}", i, t, u8::from(success[i]));
        for col in &channels.columns {
            let _ = write!(out, ",{:.4}", col[i]);
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Parses a labels CSV: eight item scores, then an optional total and optional binary flag.
pub fn parse_labels(path: &Path) -> Result<Phq8Labels> {
    let text = read_text(path)?;
    for (n, (row, line)) in data_lines(&text).enumerate() {
        let fields = split_fields(line);
        if n == 0 && looks_like_header(fields[0]) {
            continue;
        }
        if !(8..=10).contains(&fields.len()) {
            return Err(Error::parse(
                path,
                row,
                format!("expected 8 to 10 columns, found {}", fields.len()),
            ));
        }
        let mut ints = Vec::with_capacity(fields.len());
        for f in &fields {
            ints.push(
                f.parse::<i64>()
                    .map_err(|_| Error::parse(path, row, format!("'{f}' is not an integer")))?,
            );
        }
        let mut items = [0u8; 8];
        for (i, v) in ints[..8].iter().enumerate() {
            if !(0..=3).contains(v) {
                return Err(Error::parse(
                    path,
                    row,
                    format!("item {} is {v}, expected 0..=3", i + 1),
                ));
            }
            items[i] = *v as u8;
        }
        let sum: i64 = ints[..8].iter().sum();
        if let Some(&total) = ints.get(8) {
            if total != sum {
                return Err(Error::parse(
                    path,
                    row,
                    format!("total {total} does not equal item sum {sum}"),
                ));
            }
        }
        let labels = match ints.get(9) {
            Some(&b) if b == 0 || b == 1 => Phq8Labels::with_binary(items, b == 1)?,
            Some(&b) => {
                return Err(Error::parse(path, row, format!("binary flag {b} is not 0/1")))
            }
            None => Phq8Labels::new(items)?,
        };
        return Ok(labels);
    }
    Err(Error::parse(path, 0, "no label row"))
}

pub fn write_labels(path: &Path, labels: &Phq8Labels) -> Result<()> {
    let mut out = String::from(
        "PHQ8_NoInterest,PHQ8_Depressed,PHQ8_Sleep,PHQ8_Tired,PHQ8_Appetite,PHQ8_Failure,\
         PHQ8_Concentrating,PHQ8_Moving,PHQ8_Score,PHQ8_Binary\n",
    );
    for v in labels.items() {
        let _ = write!(out, "{v},");
    }
    let _ = writeln!(out, "{},{}", labels.total(), u8::from(labels.binary()));
    write_text(path, &out)
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestDocument {
    format_version: u32,
    sessions: Vec<SessionManifest>,
}

/// Loads a session manifest, resolving relative paths against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<SessionManifest>> {
    let text = read_text(path)?;
    let doc: ManifestDocument = serde_json::from_str(&text).map_err(|source| Error::Document {
        path: path.to_path_buf(),
        source,
    })?;
    if doc.format_version != MANIFEST_FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "manifest format_version {} unsupported (expected {MANIFEST_FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &PathBuf| -> Result<PathBuf> {
        let full = if p.is_absolute() { p.clone() } else { base.join(p) };
        if full.exists() {
            Ok(full)
        } else {
            Err(Error::MissingInput(full))
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    doc.sessions
        .into_iter()
        .map(|mut s| {
            if !(s.duration > 0.0) {
                return Err(Error::invalid(format!(
                    "session {} has non-positive duration",
                    s.session_id
                )));
            }
            if !seen.insert(s.session_id.clone()) {
                return Err(Error::invalid(format!(
                    "session {} listed twice",
                    s.session_id
                )));
            }
            s.landmarks = resolve(&s.landmarks)?;
            s.features = resolve(&s.features)?;
            s.lld = resolve(&s.lld)?;
            s.transcript = resolve(&s.transcript)?;
            s.labels = s.labels.as_ref().map(resolve).transpose()?;
            Ok(s)
        })
        .collect()
}

/// Writes a manifest; paths are stored exactly as given.
pub fn write_manifest(path: &Path, sessions: &[SessionManifest]) -> Result<()> {
    let doc = ManifestDocument {
        format_version: MANIFEST_FORMAT_VERSION,
        sessions: sessions.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    text.push('\n');
    write_text(path, &text)
}
