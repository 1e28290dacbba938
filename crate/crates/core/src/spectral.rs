//! Welch power spectra and the linear EEG features derived from them:
//! relative band powers, relative gamma power (RGP), the spectral asymmetry
//! index (SASI) and alpha power variability (APV).
//!
//! All band integrals use the trapezoid rule over the piecewise-linear
//! interpolant of the PSD, so a band edge that falls between two frequency
//! bins contributes its exact fractional share and adjacent bands add up.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, param, Result};
use crate::signal::Segment;

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WelchParams {
    /// Sub-window length in samples (Hann tapered).
    pub window_len: usize,
    /// Fractional overlap between consecutive sub-windows, in `[0, 1)`.
    pub overlap: f64,
}

impl Default for WelchParams {
    fn default() -> Self {
        WelchParams {
            window_len: 1024,
            overlap: 0.5,
        }
    }
}

/// One-sided power spectral density on a uniform frequency grid starting
/// at 0 Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    freqs: Vec<f64>,
    power: Vec<f64>,
}

impl Spectrum {
    /// Validates an arbitrary uniform grid. Useful for building analytic
    /// spectra in tests and examples.
    pub fn new(freqs: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        if freqs.len() != power.len() || freqs.len() < 2 {
            return param("spectrum needs at least two bins and matching lengths");
        }
        let df = freqs[1] - freqs[0];
        if df <= 0.0 {
            return param("spectrum frequencies must ascend");
        }
        for w in freqs.windows(2) {
            if ((w[1] - w[0]) - df).abs() > 1e-9 * df.max(1.0) {
                return param("spectrum frequency grid must be uniform");
            }
        }
        if power.iter().any(|p| !(*p >= 0.0)) {
            return param("spectral power must be non-negative and finite");
        }
        Ok(Spectrum { freqs, power })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn resolution(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    pub fn min_freq(&self) -> f64 {
        self.freqs[0]
    }

    pub fn max_freq(&self) -> f64 {
        *self.freqs.last().unwrap()
    }

    /// Bin-wise mean of spectra sharing one grid.
    pub fn mean(spectra: &[Spectrum]) -> Result<Spectrum> {
        let first = match spectra.first() {
            Some(s) => s,
            None => return param("cannot average an empty list of spectra"),
        };
        if spectra.iter().any(|s| s.freqs != first.freqs) {
            return param("spectra must share a frequency grid");
        }
        let n = spectra.len() as f64;
        let power = (0..first.power.len())
            .map(|k| spectra.iter().map(|s| s.power[k]).sum::<f64>() / n)
            .collect();
        Ok(Spectrum {
            freqs: first.freqs.clone(),
            power,
        })
    }

    /// Integral of the PSD from the first bin up to `f`.
    fn cumulative(&self, f: f64) -> f64 {
        let df = self.resolution();
        let pos = ((f - self.freqs[0]) / df).max(0.0);
        let i = (pos.floor() as usize).min(self.freqs.len() - 1);
        let mut acc = 0.0;
        for k in 0..i {
            acc += 0.5 * (self.power[k] + self.power[k + 1]) * df;
        }
        if i + 1 < self.freqs.len() {
            let t = f - self.freqs[i];
            let (p0, p1) = (self.power[i], self.power[i + 1]);
            acc += p0 * t + (p1 - p0) * t * t / (2.0 * df);
        }
        acc
    }
}

/// Welch PSD averaged over every sub-window of every segment. Each
/// sub-window is mean-removed and Hann tapered; the result is a one-sided
/// density in units²/Hz.
pub fn welch_psd(segments: &[Segment], params: &WelchParams) -> Result<Spectrum> {
    let first = match segments.first() {
        Some(s) => s,
        None => return param("welch_psd needs at least one segment"),
    };
    let n = first.len();
    let rate = first.sample_rate;
    if segments.iter().any(|s| s.len() != n || s.sample_rate != rate) {
        return param("all segments must share length and sample rate");
    }
    let l = params.window_len;
    if l < 2 || l > n {
        return param(format!("window length {l} must be within [2, {n}]"));
    }
    if !(0.0..1.0).contains(&params.overlap) {
        return param("overlap must lie in [0, 1)");
    }
    let step = ((l as f64 * (1.0 - params.overlap)).round() as usize).max(1);
    let fs = rate as f64;

    let window: Vec<f64> = (0..l).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / l as f64).cos()).collect();
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(l);
    let n_bins = l / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut count = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); l];

    for seg in segments {
        let mut start = 0;
        while start + l <= n {
            let chunk = &seg.samples[start..start + l];
            let mean = chunk.iter().sum::<f64>() / l as f64;
            for ((b, x), w) in buf.iter_mut().zip(chunk).zip(&window) {
                *b = Complex64::new((x - mean) * w, 0.0);
            }
            fft.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
            count += 1;
            start += step;
        }
    }

    let scale = 1.0 / (fs * win_energy * count as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (l % 2 == 0 && k == l / 2) { 1.0 } else { 2.0 };
            a * scale * one_sided
        })
        .collect();
    let freqs = (0..n_bins).map(|k| k as f64 * fs / l as f64).collect();
    Ok(Spectrum { freqs, power })
}

/// Trapezoidal integral of the PSD over `[lo, hi]` Hz.
pub fn band_power(spec: &Spectrum, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return param(format!("inverted band [{lo}, {hi}]"));
    }
    let eps = 1e-9 * spec.max_freq().max(1.0);
    if lo < spec.min_freq() - eps || hi > spec.max_freq() + eps {
        return param(format!(
            "band [{lo}, {hi}] outside spectrum range [{}, {}]",
            spec.min_freq(),
            spec.max_freq()
        ));
    }
    Ok((spec.cumulative(hi) - spec.cumulative(lo)).max(0.0))
}

/// A named frequency band `[lo, hi)` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDef {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
}

pub const THETA: BandDef = BandDef { name: "theta", lo: 4.0, hi: 8.0 };
pub const ALPHA: BandDef = BandDef { name: "alpha", lo: 8.0, hi: 12.0 };
pub const BETA: BandDef = BandDef { name: "beta", lo: 12.0, hi: 30.0 };
pub const GAMMA: BandDef = BandDef { name: "gamma", lo: 30.0, hi: 45.0 };

/// Range whose power normalizes the relative band powers.
pub const TOTAL_RANGE: (f64, f64) = (3.0, 48.0);
/// Summation range of the RGP denominator; the numerator starts at 30 Hz.
pub const RGP_RANGE: (f64, f64) = (3.0, 46.0);
/// Search range for the individual alpha peak.
pub const ALPHA_PEAK_RANGE: (f64, f64) = (8.0, 13.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeBandPowers {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Theta, alpha, beta and gamma power as fractions of the 3–48 Hz power.
pub fn relative_band_powers(spec: &Spectrum) -> Result<RelativeBandPowers> {
    let total = band_power(spec, TOTAL_RANGE.0, TOTAL_RANGE.1)?;
    if !(total > 0.0) {
        return degenerate("zero total power in 3-48 Hz");
    }
    let rel = |b: BandDef| band_power(spec, b.lo, b.hi).map(|p| p / total);
    Ok(RelativeBandPowers {
        theta: rel(THETA)?,
        alpha: rel(ALPHA)?,
        beta: rel(BETA)?,
        gamma: rel(GAMMA)?,
    })
}

/// Sum of unit-band powers `[f, f+1)` for integer `f` in `[lo, hi)`,
/// equal to the band integral over `[lo, hi]`.
fn unit_band_sum(spec: &Spectrum, lo: f64, hi: f64) -> Result<f64> {
    band_power(spec, lo, hi)
}

/// Relative gamma power: 30–46 Hz power over 3–46 Hz power.
pub fn rgp(spec: &Spectrum) -> Result<f64> {
    let total = unit_band_sum(spec, RGP_RANGE.0, RGP_RANGE.1)?;
    if !(total > 0.0) {
        return degenerate("zero power in 3-46 Hz");
    }
    Ok(unit_band_sum(spec, GAMMA.lo, RGP_RANGE.1)? / total)
}

/// Individual alpha peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectSpectralProfile {
    /// Frequency (Hz) of the PSD maximum in 8–13 Hz.
    pub fc: f64,
}

/// Frequency of the largest PSD bin inside 8–13 Hz; the lowest such
/// frequency wins ties.
pub fn find_alpha_peak(spec: &Spectrum) -> Result<SubjectSpectralProfile> {
    let (lo, hi) = ALPHA_PEAK_RANGE;
    let eps = 1e-9;
    let mut best: Option<(f64, f64)> = None;
    for (&f, &p) in spec.freqs.iter().zip(&spec.power) {
        if f < lo - eps || f > hi + eps {
            continue;
        }
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((f, p)),
        }
    }
    match best {
        Some((fc, _)) => Ok(SubjectSpectralProfile { fc }),
        None => param("spectrum has no bins in the 8-13 Hz alpha range"),
    }
}

/// Spectral asymmetry index `(Pβ − Pδ) / (Pβ + Pδ)` with
/// `Pδ` over `[Fc−6, Fc−2]` Hz and `Pβ` over `[Fc+2, Fc+26]` Hz. The upper
/// edge is clipped to the top of the spectrum.
pub fn sasi(spec: &Spectrum, profile: &SubjectSpectralProfile) -> Result<f64> {
    let fc = profile.fc;
    let lower = unit_band_sum(spec, (fc - 6.0).max(spec.min_freq()), fc - 2.0)?;
    let upper = unit_band_sum(spec, fc + 2.0, (fc + 26.0).min(spec.max_freq()))?;
    let denom = upper + lower;
    if !(denom > 0.0) {
        return degenerate("zero power in both SASI bands");
    }
    Ok((upper - lower) / denom)
}

/// Mean power `W = (1/N) Σ V(r)²` of one (alpha-filtered) segment.
pub fn segment_power(samples: &[f64]) -> f64 {
    samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64
}

/// Per-segment alpha powers with their mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPowerSeries {
    pub w: Vec<f64>,
    pub w0: f64,
    pub sigma: f64,
}

impl AlphaPowerSeries {
    pub fn from_powers(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return param("alpha power variability needs at least two segments");
        }
        let n = w.len() as f64;
        let w0 = w.iter().sum::<f64>() / n;
        let sigma = (w.iter().map(|v| (v - w0).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        Ok(AlphaPowerSeries { w, w0, sigma })
    }

    /// Builds the series from segments that are already alpha-band filtered.
    pub fn from_segments(segments: &[Segment]) -> Result<Self> {
        Self::from_powers(segments.iter().map(|s| segment_power(&s.samples)).collect())
    }
}

/// Alpha power variability `σ / W0`.
pub fn apv(series: &AlphaPowerSeries) -> Result<f64> {
    if series.w.len() < 2 {
        return param("alpha power variability needs at least two segments");
    }
    if !(series.w0 > 0.0) {
        return degenerate("zero mean alpha power");
    }
    Ok(series.sigma / series.w0)
}
