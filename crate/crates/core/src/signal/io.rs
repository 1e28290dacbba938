//! Recording files.
//!
//! * **CSV**: header `t,FP1,FP2,...,O2` (channel columns in any order, `t`
//!   optional), one row per sample, plus a sidecar JSON file with the same
//!   stem holding `{subject_id, label, sample_rate, segment_marks}`.
//! * **JSON manifest**: a single JSON object with the sidecar fields and a
//!   `channels` object mapping each label to its sample array.
//! * **Dataset manifest**: a JSON list of `{path, format}` entries, paths
//!   relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::error::{Error, Result};

use super::{Label, Recording, SEGMENT_SECONDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RecordingFormat {
    #[default]
    Csv,
    JsonManifest,
}

/// Sidecar metadata shared by both recording formats.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    subject_id: String,
    #[serde(default)]
    label: Option<Label>,
    sample_rate: u32,
    #[serde(default)]
    segment_marks: Vec<usize>,
    #[serde(default = "default_segment_seconds")]
    segment_seconds: u32,
}

fn default_segment_seconds() -> u32 {
    SEGMENT_SECONDS
}

#[derive(Debug, Deserialize, Serialize)]
struct JsonRecording {
    #[serde(flatten)]
    meta: Sidecar,
    channels: BTreeMap<String, Vec<f64>>,
}

/// One entry of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub format: RecordingFormat,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn load_recording(path: &Path, format: RecordingFormat) -> Result<Recording> {
    match format {
        RecordingFormat::Csv => load_csv(path),
        RecordingFormat::JsonManifest => {
            let rec: JsonRecording = serde_json::from_reader(BufReader::new(File::open(path)?))?;
            let channels = order_channels(rec.channels.into_iter())?;
            build(rec.meta, channels)
        }
    }
}

fn build(meta: Sidecar, channels: Vec<Vec<f64>>) -> Result<Recording> {
    Recording::new(meta.subject_id, meta.label, meta.sample_rate, channels, meta.segment_marks)?
        .with_segment_seconds(meta.segment_seconds)
}

/// Maps labelled columns onto canonical channel order, rejecting unknown
/// and duplicate labels and naming the first missing one.
fn order_channels(cols: impl Iterator<Item = (String, Vec<f64>)>) -> Result<Vec<Vec<f64>>> {
    let mut slots: Vec<Option<Vec<f64>>> = vec![None; N_CHANNELS];
    for (name, xs) in cols {
        let c: ChannelId = name.parse()?;
        if slots[c.index()].replace(xs).is_some() {
            return Err(Error::Schema(format!("duplicate channel {c}")));
        }
    }
    slots
        .into_iter()
        .zip(ChannelId::ALL)
        .map(|(s, c)| s.ok_or_else(|| Error::Schema(format!("missing channel {c}"))))
        .collect()
}

fn load_csv(path: &Path) -> Result<Recording> {
    let meta: Sidecar = serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let mut names = Vec::new();
    let mut keep = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if h.eq_ignore_ascii_case("t") {
            continue;
        }
        names.push(h.to_string());
        keep.push(i);
    }
    // Validate the header before reading any rows.
    order_channels(names.iter().map(|n| (n.clone(), Vec::new())))?;

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); keep.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (col, &i) in cols.iter_mut().zip(&keep) {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| {
                Error::Schema(format!("row {}: column {} is not a number: {field:?}", row + 2, headers[i].trim()))
            })?;
            col.push(v);
        }
    }
    let channels = order_channels(names.into_iter().zip(cols))?;
    build(meta, channels)
}

fn meta_of(rec: &Recording) -> Sidecar {
    Sidecar {
        subject_id: rec.subject_id.clone(),
        label: rec.label,
        sample_rate: rec.sample_rate,
        segment_marks: rec.segment_marks().to_vec(),
        segment_seconds: rec.segment_seconds,
    }
}

pub fn save_recording(rec: &Recording, path: &Path, format: RecordingFormat) -> Result<()> {
    match format {
        RecordingFormat::Csv => {
            let mut w = BufWriter::new(File::create(path)?);
            write!(w, "t")?;
            for c in ChannelId::ALL {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
            let dt = 1.0 / rec.sample_rate as f64;
            for i in 0..rec.n_samples() {
                write!(w, "{}", i as f64 * dt)?;
                for ch in rec.channels() {
                    write!(w, ",{}", ch[i])?;
                }
                writeln!(w)?;
            }
            w.flush()?;
            let side = BufWriter::new(File::create(sidecar_path(path))?);
            serde_json::to_writer_pretty(side, &meta_of(rec))?;
        }
        RecordingFormat::JsonManifest => {
            let channels = ChannelId::ALL
                .iter()
                .map(|c| (c.name().to_string(), rec.channel(*c).to_vec()))
                .collect();
            let out = JsonRecording { meta: meta_of(rec), channels };
            serde_json::to_writer(BufWriter::new(File::create(path)?), &out)?;
        }
    }
    Ok(())
}

/// Loads every recording listed in a dataset manifest.
pub fn load_dataset(manifest: &Path) -> Result<Vec<Recording>> {
    let entries: Vec<DatasetEntry> = serde_json::from_reader(BufReader::new(File::open(manifest)?))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    entries
        .iter()
        .map(|e| load_recording(&base.join(&e.path), e.format))
        .collect()
}

/// Writes each recording as `<subject_id>.csv` (+ sidecar) or
/// `<subject_id>.json` into `dir` and a `manifest.json` listing them.
/// Returns the manifest path.
pub fn save_dataset(recs: &[Recording], dir: &Path, format: RecordingFormat) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let ext = match format {
        RecordingFormat::Csv => "csv",
        RecordingFormat::JsonManifest => "json",
    };
    let mut entries = Vec::with_capacity(recs.len());
    for r in recs {
        let file = PathBuf::from(format!("{}.{ext}", r.subject_id));
        save_recording(r, &dir.join(&file), format)?;
        entries.push(DatasetEntry { path: file, format });
    }
    let manifest = dir.join("manifest.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&manifest)?), &entries)?;
    Ok(manifest)
}
