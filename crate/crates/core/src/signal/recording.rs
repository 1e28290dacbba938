use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::error::{param, Error, Result};

/// Default segment length in seconds (4000 samples at 400 Hz, 2000 at 200 Hz).
pub const SEGMENT_SECONDS: u32 = 10;

/// Class label. Serialized as the signed decision value used by the voting
/// rule: `-1` healthy, `+1` depressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Healthy,
    Depressed,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Healthy => -1,
            Label::Depressed => 1,
        }
    }

    pub fn from_sign(v: i64) -> Option<Self> {
        match v {
            -1 => Some(Label::Healthy),
            1 => Some(Label::Depressed),
            _ => None,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Label::Healthy => Label::Depressed,
            Label::Depressed => Label::Healthy,
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Label::from_sign(v).ok_or_else(|| serde::de::Error::custom(format!("label must be -1 or 1, got {v}")))
    }
}

/// A multichannel recording holding all 18 electrodes at one sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub label: Option<Label>,
    pub sample_rate: u32,
    pub segment_seconds: u32,
    channels: Vec<Vec<f64>>,
    segment_marks: Vec<usize>,
    /// Pass band applied by [`crate::signal::bandpass`], if any. Decimation
    /// requires the upper edge to sit below the new Nyquist frequency.
    pub passband: Option<(f64, f64)>,
}

impl Recording {
    /// Builds a recording from channel sequences given in [`ChannelId::ALL`]
    /// order, validating lengths and segment marks.
    pub fn new(
        subject_id: impl Into<String>,
        label: Option<Label>,
        sample_rate: u32,
        channels: Vec<Vec<f64>>,
        segment_marks: Vec<usize>,
    ) -> Result<Self> {
        let rec = Recording {
            subject_id: subject_id.into(),
            label,
            sample_rate,
            segment_seconds: SEGMENT_SECONDS,
            channels,
            segment_marks,
            passband: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn with_segment_seconds(mut self, seconds: u32) -> Result<Self> {
        self.segment_seconds = seconds;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return param("sample rate must be positive");
        }
        if self.segment_seconds == 0 {
            return param("segment length must be positive");
        }
        if self.channels.len() != N_CHANNELS {
            return Err(Error::Schema(format!(
                "expected {N_CHANNELS} channels, got {}",
                self.channels.len()
            )));
        }
        let expected = self.channels[0].len();
        for (c, xs) in ChannelId::ALL.iter().zip(&self.channels) {
            if xs.len() != expected {
                return Err(Error::LengthMismatch {
                    channel: c.name().to_string(),
                    expected,
                    found: xs.len(),
                });
            }
        }
        let seg = self.segment_len();
        let mut marks = self.segment_marks.clone();
        marks.sort_unstable();
        for (i, &m) in marks.iter().enumerate() {
            if m + seg > expected {
                return param(format!(
                    "segment mark {m} + {seg} samples exceeds signal length {expected}"
                ));
            }
            if i > 0 && marks[i - 1] + seg > m {
                return param(format!("segment marks {} and {m} overlap", marks[i - 1]));
            }
        }
        Ok(())
    }

    /// Samples per segment at the current rate.
    pub fn segment_len(&self) -> usize {
        self.segment_seconds as usize * self.sample_rate as usize
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].len()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, c: ChannelId) -> &[f64] {
        &self.channels[c.index()]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn segment_marks(&self) -> &[usize] {
        &self.segment_marks
    }

    /// Replaces the segment marks, re-validating them against the signal.
    pub fn set_segment_marks(&mut self, marks: Vec<usize>) -> Result<()> {
        let old = std::mem::replace(&mut self.segment_marks, marks);
        if let Err(e) = self.validate() {
            self.segment_marks = old;
            return Err(e);
        }
        Ok(())
    }

    /// Declares the signal band-limited to `high` Hz without filtering it,
    /// e.g. for data that was filtered upstream.
    pub fn assume_band_limited(mut self, low: f64, high: f64) -> Self {
        self.passband = Some((low, high));
        self
    }

    /// Applies `f` to every channel. `f` must preserve the length.
    pub(crate) fn map_channels<F>(&self, f: F) -> Result<Recording>
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        use rayon::prelude::*;
        let channels: Vec<Vec<f64>> = self.channels.par_iter().map(|x| f(x)).collect();
        let out = Recording {
            channels,
            ..self.clone_meta()
        };
        out.validate()?;
        Ok(out)
    }

    fn clone_meta(&self) -> Recording {
        Recording {
            subject_id: self.subject_id.clone(),
            label: self.label,
            sample_rate: self.sample_rate,
            segment_seconds: self.segment_seconds,
            channels: Vec::new(),
            segment_marks: self.segment_marks.clone(),
            passband: self.passband,
        }
    }
}

/// One fixed-length window of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub channel: ChannelId,
}

impl Segment {
    pub fn new(samples: Vec<f64>, sample_rate: u32, channel: ChannelId) -> Self {
        Segment {
            samples,
            sample_rate,
            channel,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Keeps every `factor`-th sample. The recording must already be
/// band-limited below the new Nyquist frequency; no anti-alias filter is
/// applied here.
pub fn downsample(rec: &Recording, factor: u32) -> Result<Recording> {
    if factor == 0 {
        return param("downsample factor must be positive");
    }
    if factor == 1 {
        return Ok(rec.clone());
    }
    if rec.sample_rate % factor != 0 {
        return param(format!(
            "downsample factor {factor} does not divide sample rate {}",
            rec.sample_rate
        ));
    }
    let new_rate = rec.sample_rate / factor;
    let nyquist = new_rate as f64 / 2.0;
    match rec.passband {
        Some((_, hi)) if hi < nyquist => {}
        Some((_, hi)) => {
            return param(format!(
                "signal band-limited to {hi} Hz, not below the new Nyquist {nyquist} Hz"
            ))
        }
        None => {
            return param("recording must be band-pass filtered before downsampling")
        }
    }
    let step = factor as usize;
    let channels = rec
        .channels
        .iter()
        .map(|x| x.iter().step_by(step).copied().collect())
        .collect();
    let marks = rec.segment_marks.iter().map(|&m| m / step).collect();
    let mut out = Recording {
        channels,
        sample_rate: new_rate,
        segment_marks: marks,
        ..rec.clone_meta()
    };
    // Ceil-division of the length can leave a trailing mark one sample short.
    let seg = out.segment_len();
    let n = out.n_samples();
    out.segment_marks.retain(|&m| m + seg <= n);
    out.validate()?;
    Ok(out)
}

/// Returns the first `max_segments` marked segments of `channel`, in mark
/// order.
pub fn extract_segments(rec: &Recording, channel: ChannelId, max_segments: usize) -> Vec<Segment> {
    let seg = rec.segment_len();
    let x = rec.channel(channel);
    rec.segment_marks
        .iter()
        .take(max_segments)
        .map(|&m| Segment::new(x[m..m + seg].to_vec(), rec.sample_rate, channel))
        .collect()
}

/// Sort helper shared by feature code: order `f64` with NaN last.
pub(crate) fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, rate: u32, marks: Vec<usize>) -> Recording {
        Recording::new("s", Some(Label::Healthy), rate, vec![vec![0.0; n]; N_CHANNELS], marks).unwrap()
    }

    #[test]
    fn ragged_channels_rejected() {
        let mut chans = vec![vec![0.0; 100]; N_CHANNELS];
        chans[5].pop();
        let err = Recording::new("s", None, 10, chans, vec![]).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { ref channel, expected: 100, found: 99 } if channel == "F4"));
    }

    #[test]
    fn overlapping_marks_rejected() {
        let chans = vec![vec![0.0; 1000]; N_CHANNELS];
        assert!(Recording::new("s", None, 10, chans.clone(), vec![0, 50]).is_err());
        assert!(Recording::new("s", None, 10, chans.clone(), vec![950]).is_err());
        assert!(Recording::new("s", None, 10, chans, vec![100, 0]).is_ok());
    }

    #[test]
    fn downsample_by_two_halves_segments() {
        let rec = flat(400 * 30, 400, vec![0, 4000, 8000]).assume_band_limited(3.0, 48.0);
        let ds = downsample(&rec, 2).unwrap();
        assert_eq!(ds.sample_rate, 200);
        assert_eq!(ds.n_samples(), 6000);
        assert_eq!(ds.segment_marks(), &[0, 2000, 4000]);
        let segs = extract_segments(&ds, ChannelId::O1, 30);
        assert!(segs.iter().all(|s| s.len() == 2000));
    }

    #[test]
    fn downsample_identity_and_errors() {
        let rec = flat(4000, 400, vec![0]);
        assert_eq!(downsample(&rec, 1).unwrap(), rec);
        assert!(matches!(downsample(&rec, 3), Err(Error::Parameter(_))));
        // not band-limited
        assert!(matches!(downsample(&rec, 2), Err(Error::Parameter(_))));
        let wide = rec.clone().assume_band_limited(3.0, 120.0);
        assert!(matches!(downsample(&wide, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn extract_truncates_in_mark_order() {
        let marks: Vec<usize> = (0..35).map(|i| i * 4000).collect();
        let rec = flat(35 * 4000, 400, marks);
        let segs = extract_segments(&rec, ChannelId::Fz, 30);
        assert_eq!(segs.len(), 30);
        let total: usize = segs.iter().map(Segment::len).sum();
        assert_eq!(total as f64 / 400.0, 300.0);

        let rec = flat(10 * 4000, 400, (0..10).map(|i| i * 4000).collect());
        assert_eq!(extract_segments(&rec, ChannelId::Fz, 30).len(), 10);
        let rec = flat(4000, 400, vec![]);
        assert!(extract_segments(&rec, ChannelId::Fz, 30).is_empty());
    }

    #[test]
    fn extract_follows_mark_order_not_position() {
        let mut chans = vec![vec![0.0; 40]; N_CHANNELS];
        for (i, v) in chans[0].iter_mut().enumerate() {
            *v = i as f64;
        }
        let rec = Recording::new("s", None, 1, chans, vec![20, 0])
            .unwrap()
            .with_segment_seconds(10)
            .unwrap();
        let segs = extract_segments(&rec, ChannelId::Fp1, 5);
        assert_eq!(segs[0].samples[0], 20.0);
        assert_eq!(segs[1].samples[0], 0.0);
    }

    #[test]
    fn label_serializes_as_sign() {
        assert_eq!(serde_json::to_string(&Label::Depressed).unwrap(), "1");
        assert_eq!(serde_json::from_str::<Label>("-1").unwrap(), Label::Healthy);
        assert!(serde_json::from_str::<Label>("0").is_err());
    }
}
