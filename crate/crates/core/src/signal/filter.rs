//! Zero-phase Butterworth band-pass filtering.
//!
//! The band pass is a cascade of a Butterworth high-pass at the lower edge
//! and a Butterworth low-pass at the upper edge, both realized as
//! second-order sections from the bilinear transform with pre-warped
//! cutoffs. [`filtfilt`] runs the cascade forward and backward over an
//! odd-reflected extension of the signal, so the result has no phase shift
//! and the magnitude response is squared.

use std::f64::consts::PI;

use crate::error::{param, Result};

use super::Recording;

/// Order of each Butterworth edge (per pass).
pub const DEFAULT_FILTER_ORDER: usize = 10;

/// One biquad: `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

/// A cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    sections: Vec<Biquad>,
    /// Padding length used by [`filtfilt`]: six periods of the lowest cutoff.
    settle_samples: usize,
}

#[derive(Clone, Copy)]
enum Edge {
    Low,
    High,
}

fn butterworth_edge(order: usize, cutoff: f64, fs: f64, edge: Edge) -> Vec<Biquad> {
    let k = (PI * cutoff / fs).tan();
    let mut out = Vec::with_capacity(order.div_ceil(2));
    for i in 0..order / 2 {
        let q = 1.0 / (2.0 * ((2 * i + 1) as f64 * PI / (2 * order) as f64).sin());
        let norm = 1.0 / (1.0 + k / q + k * k);
        let a = [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm];
        let b = match edge {
            Edge::High => [norm, -2.0 * norm, norm],
            Edge::Low => {
                let b0 = k * k * norm;
                [b0, 2.0 * b0, b0]
            }
        };
        out.push(Biquad { b, a });
    }
    if order % 2 == 1 {
        let norm = 1.0 / (1.0 + k);
        let a = [(k - 1.0) * norm, 0.0];
        let b = match edge {
            Edge::High => [norm, -norm, 0.0],
            Edge::Low => [k * norm, k * norm, 0.0],
        };
        out.push(Biquad { b, a });
    }
    out
}

impl Sos {
    /// Butterworth band pass `[low, high]` Hz with `order` poles per edge.
    pub fn bandpass(low: f64, high: f64, fs: f64, order: usize) -> Result<Self> {
        if !(low > 0.0 && low < high && high < fs / 2.0) {
            return param(format!(
                "band edges must satisfy 0 < low < high < fs/2, got [{low}, {high}] at {fs} Hz"
            ));
        }
        if order == 0 {
            return param("filter order must be positive");
        }
        let mut sections = butterworth_edge(order, low, fs, Edge::High);
        sections.extend(butterworth_edge(order, high, fs, Edge::Low));
        Ok(Sos {
            sections,
            settle_samples: (6.0 * fs / low).ceil() as usize,
        })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Causal filtering (direct form II transposed). Each section starts in
    /// the steady state it would reach under a constant input equal to the
    /// first sample, which suppresses the start-up step transient.
    pub fn filter(&self, x: &mut [f64]) {
        let mut u = x.first().copied().unwrap_or(0.0);
        for s in &self.sections {
            let dc = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]);
            let y = dc * u;
            let mut z2 = s.b[2] * u - s.a[1] * y;
            let mut z1 = y - s.b[0] * u;
            u = y;
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[0] * y + z2;
                z2 = s.b[2] * input - s.a[1] * y;
                *v = y;
            }
        }
    }

    /// Magnitude response at `f` Hz.
    pub fn gain(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        let z1 = (w.cos(), -w.sin());
        let z2 = ((2.0 * w).cos(), -(2.0 * w).sin());
        self.sections
            .iter()
            .map(|s| {
                let num = (s.b[0] + s.b[1] * z1.0 + s.b[2] * z2.0, s.b[1] * z1.1 + s.b[2] * z2.1);
                let den = (1.0 + s.a[0] * z1.0 + s.a[1] * z2.0, s.a[0] * z1.1 + s.a[1] * z2.1);
                (num.0.hypot(num.1)) / (den.0.hypot(den.1))
            })
            .product()
    }
}

/// Forward-backward filtering with mirror padding.
pub fn filtfilt(sos: &Sos, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return x.to_vec();
    }
    let pad = sos.settle_samples.min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| x[n - 1 - i]));

    sos.filter(&mut ext);
    ext.reverse();
    sos.filter(&mut ext);
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

/// Zero-phase band pass of every channel. The pass band is recorded on the
/// result so that later decimation can check band-limitation.
pub fn bandpass(rec: &Recording, low: f64, high: f64) -> Result<Recording> {
    bandpass_with_order(rec, low, high, DEFAULT_FILTER_ORDER)
}

pub fn bandpass_with_order(rec: &Recording, low: f64, high: f64, order: usize) -> Result<Recording> {
    let sos = Sos::bandpass(low, high, rec.sample_rate as f64, order)?;
    let mut out = rec.map_channels(|x| filtfilt(&sos, x))?;
    out.passband = Some((low, high));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::N_CHANNELS;

    fn tone(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    /// RMS ratio over the interior of a 60 s tone; the outer 2 s on each
    /// side carry edge transients.
    fn filtered_rms_ratio(freq: f64) -> f64 {
        let x = tone(freq, 400.0, 400 * 60);
        let sos = Sos::bandpass(3.0, 48.0, 400.0, DEFAULT_FILTER_ORDER).unwrap();
        let y = filtfilt(&sos, &x);
        let inner = 800..x.len() - 800;
        rms(&y[inner.clone()]) / rms(&x[inner])
    }

    #[test]
    fn rejects_60hz_tone() {
        let r = filtered_rms_ratio(60.0);
        assert!(r < 0.01, "{r}");
    }

    #[test]
    fn passes_10hz_tone() {
        assert!((filtered_rms_ratio(10.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn forty_db_one_octave_out() {
        let sos = Sos::bandpass(3.0, 48.0, 400.0, DEFAULT_FILTER_ORDER).unwrap();
        // forward-backward squares the single-pass magnitude
        for f in [1.5, 96.0] {
            let g = sos.gain(f, 400.0).powi(2);
            assert!(20.0 * g.log10() <= -40.0, "{f} Hz: {g}");
        }
        assert!((sos.gain(20.0, 400.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_in_zero_out_and_length_kept() {
        let rec = Recording::new("z", None, 400, vec![vec![0.0; 4000]; N_CHANNELS], vec![0]).unwrap();
        let out = bandpass(&rec, 3.0, 48.0).unwrap();
        assert_eq!(out.n_samples(), 4000);
        assert!(out.channels().iter().flatten().all(|&v| v == 0.0));
        assert_eq!(out.passband, Some((3.0, 48.0)));
    }

    #[test]
    fn invalid_edges() {
        assert!(Sos::bandpass(0.0, 48.0, 400.0, 4).is_err());
        assert!(Sos::bandpass(48.0, 3.0, 400.0, 4).is_err());
        assert!(Sos::bandpass(3.0, 200.0, 400.0, 4).is_err());
    }
}
