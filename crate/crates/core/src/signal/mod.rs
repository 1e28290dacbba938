//! Recordings: loading, band-pass filtering, decimation, segmentation and a
//! synthetic cohort generator.

pub mod filter;
pub mod io;
pub mod noise;
mod recording;
pub mod synth;

pub use filter::{bandpass, bandpass_with_order, filtfilt, Sos, DEFAULT_FILTER_ORDER};
pub use io::{load_dataset, load_recording, save_dataset, save_recording, DatasetEntry, RecordingFormat};
pub(crate) use recording::cmp_f64;
pub use recording::{downsample, extract_segments, Label, Recording, Segment, SEGMENT_SECONDS};
pub use synth::{synth_dataset, BandLevels, ClassEffect, SynthSpec};
