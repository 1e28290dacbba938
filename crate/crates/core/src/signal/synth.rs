//! Synthetic labelled cohorts with controllable class effects.
//!
//! Every channel is a Gaussian process whose spectrum is a `1/f^β`
//! background plus raised-cosine bumps in the theta, alpha, beta and gamma
//! bands. The alpha component is generated separately and multiplied by a
//! per-segment log-normal gain, which is what alpha power variability
//! measures. "Depressed" subjects receive, scaled by `effect`:
//!
//! * beta amplitude multiplied by `1 + effect * beta_gain`,
//! * background exponent increased by `effect * exponent_shift`
//!   (smoother, less complex signal),
//! * alpha variability multiplied by `1 + effect * alpha_variability_gain`.
//!
//! With `effect = 0` both classes are drawn from the same distribution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::error::{param, Result};
use crate::seed::{derive_seed, rng};

use super::noise::{band_bump, shaped_noise, Component};
use super::{Label, Recording};
use rand::Rng;
use rand_distr::StandardNormal;

/// RMS amplitude (µV) of each rhythmic component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandLevels {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for BandLevels {
    fn default() -> Self {
        BandLevels {
            theta: 6.0,
            alpha: 12.0,
            beta: 4.0,
            gamma: 1.5,
        }
    }
}

/// How the depressed class differs per unit of effect magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassEffect {
    pub beta_gain: f64,
    pub exponent_shift: f64,
    pub alpha_variability_gain: f64,
}

impl Default for ClassEffect {
    fn default() -> Self {
        ClassEffect {
            beta_gain: 1.0,
            exponent_shift: 0.5,
            alpha_variability_gain: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    /// Must be even; the first half is healthy, the second depressed.
    pub n_subjects: usize,
    pub sample_rate: u32,
    pub n_segments: usize,
    pub segment_seconds: u32,
    /// `β` of the `1/f^β` background power spectrum.
    pub background_exponent: f64,
    /// RMS of the background component (µV).
    pub background_level: f64,
    pub bands: BandLevels,
    /// Log-s.d. of the per-segment alpha gain.
    pub alpha_variability: f64,
    /// Log-s.d. of per-subject, per-channel component gains.
    pub subject_jitter: f64,
    /// Overall class-effect magnitude; 0 gives indistinguishable classes.
    pub effect: f64,
    pub depressed: ClassEffect,
    /// Channels carrying the class effect; empty means all channels.
    pub effect_channels: Vec<ChannelId>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_subjects: 20,
            sample_rate: 400,
            n_segments: 30,
            segment_seconds: super::SEGMENT_SECONDS,
            background_exponent: 1.0,
            background_level: 8.0,
            bands: BandLevels::default(),
            alpha_variability: 0.2,
            subject_jitter: 0.2,
            effect: 0.0,
            depressed: ClassEffect::default(),
            effect_channels: Vec::new(),
        }
    }
}

impl SynthSpec {
    fn carries_effect(&self, c: ChannelId) -> bool {
        self.effect_channels.is_empty() || self.effect_channels.contains(&c)
    }
}

/// Generates `spec.n_subjects` labelled recordings with every contiguous
/// segment marked. Bit-identical for identical `(spec, seed)`.
pub fn synth_dataset(spec: &SynthSpec, seed: u64) -> Result<Vec<Recording>> {
    if spec.n_subjects == 0 || spec.n_subjects % 2 != 0 {
        return param(format!("subject count must be even and positive, got {}", spec.n_subjects));
    }
    if spec.n_segments == 0 || spec.sample_rate < 100 {
        return param("need at least one segment and a sample rate of at least 100 Hz");
    }
    (0..spec.n_subjects)
        .into_par_iter()
        .map(|i| {
            let label = if i < spec.n_subjects / 2 { Label::Healthy } else { Label::Depressed };
            synth_subject(spec, i, label, derive_seed(seed, i as u64))
        })
        .collect()
}

fn synth_subject(spec: &SynthSpec, index: usize, label: Label, seed: u64) -> Result<Recording> {
    let fs = spec.sample_rate as f64;
    let seg = spec.segment_seconds as usize * spec.sample_rate as usize;
    let n = seg * spec.n_segments;
    let mut subject_rng = rng(seed);
    let alpha_peak = 9.0 + 2.0 * subject_rng.random::<f64>();

    let channels: Vec<Vec<f64>> = ChannelId::ALL
        .par_iter()
        .map(|&c| {
            let mut r = rng(derive_seed(seed, 1 + c.index() as u64));
            let mut jitter = || (spec.subject_jitter * r.sample::<f64, _>(StandardNormal)).exp();
            let gains = [jitter(), jitter(), jitter(), jitter(), jitter()];
            let e = if label == Label::Depressed && spec.carries_effect(c) { spec.effect } else { 0.0 };

            let exponent = spec.background_exponent + e * spec.depressed.exponent_shift;
            let beta_level = spec.bands.beta * (1.0 + e * spec.depressed.beta_gain);
            let alpha_sd = spec.alpha_variability * (1.0 + e * spec.depressed.alpha_variability_gain);

            let background = move |f: f64| if f < 1.0 { 0.0 } else { f.powf(-exponent / 2.0) };
            let theta = band_bump(4.0, 8.0);
            let beta = band_bump(13.0, 28.0);
            let gamma = band_bump(31.0, 44.0);
            let alpha = band_bump(alpha_peak - 1.5, alpha_peak + 1.5);

            let mut x = shaped_noise(
                n,
                fs,
                &[
                    Component { shape: &background, variance: (spec.background_level * gains[0]).powi(2) },
                    Component { shape: &theta, variance: (spec.bands.theta * gains[1]).powi(2) },
                    Component { shape: &beta, variance: (beta_level * gains[2]).powi(2) },
                    Component { shape: &gamma, variance: (spec.bands.gamma * gains[3]).powi(2) },
                ],
                &mut r,
            );
            let a = shaped_noise(
                n,
                fs,
                &[Component { shape: &alpha, variance: (spec.bands.alpha * gains[4]).powi(2) }],
                &mut r,
            );
            for (s, chunk) in a.chunks(seg).enumerate() {
                let z: f64 = r.sample(StandardNormal);
                let g = (alpha_sd * z - alpha_sd * alpha_sd / 2.0).exp();
                let start = s * seg;
                for (k, v) in chunk.iter().enumerate() {
                    x[start + k] += g * v;
                }
            }
            x
        })
        .collect();
    debug_assert_eq!(channels.len(), N_CHANNELS);

    let marks = (0..spec.n_segments).map(|s| s * seg).collect();
    Recording::new(format!("synth-{index:03}"), Some(label), spec.sample_rate, channels, marks)?
        .with_segment_seconds(spec.segment_seconds)
}
