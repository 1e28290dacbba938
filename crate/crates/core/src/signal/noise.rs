//! Gaussian noise with a prescribed amplitude spectrum, generated by
//! spectral synthesis: independent complex Gaussian Fourier coefficients
//! shaped by the target amplitude, made Hermitian, and inverse transformed.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// One additive spectral component: a shape over frequency and the
/// variance it should contribute to the time series.
pub struct Component<'a> {
    pub shape: &'a dyn Fn(f64) -> f64,
    pub variance: f64,
}

/// Draws `n` samples of a zero-mean Gaussian process at `fs` Hz whose
/// expected spectrum is the sum of `components`. Each component's expected
/// variance equals its `variance` field.
pub fn shaped_noise<R: Rng + ?Sized>(n: usize, fs: f64, components: &[Component<'_>], rng: &mut R) -> Vec<f64> {
    if n < 4 {
        return vec![0.0; n];
    }
    let half = n / 2;
    let freq = |k: usize| k as f64 * fs / n as f64;
    // Positive frequencies strictly below Nyquist carry the power.
    let bins = 1..half.max(1);
    let mut amp2 = vec![0.0; half + 1];
    for c in components {
        let norm: f64 = bins.clone().map(|k| (c.shape)(freq(k)).powi(2)).sum();
        if norm <= 0.0 || c.variance <= 0.0 {
            continue;
        }
        let scale2 = c.variance * (n as f64).powi(2) / (2.0 * norm);
        for k in bins.clone() {
            amp2[k] += scale2 * (c.shape)(freq(k)).powi(2);
        }
    }

    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in bins {
        let a = (amp2[k] / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        spec[k] = Complex64::new(a * re, a * im);
        spec[n - k] = spec[k].conj();
    }
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    ifft.process(&mut spec);
    spec.iter().map(|c| c.re / n as f64).collect()
}

/// Unit-variance `1/f^exponent` noise (power spectrum), zero below `f_min`.
pub fn power_law_noise<R: Rng + ?Sized>(n: usize, fs: f64, exponent: f64, f_min: f64, rng: &mut R) -> Vec<f64> {
    let shape = move |f: f64| if f < f_min { 0.0 } else { f.powf(-exponent / 2.0) };
    let mut x = shaped_noise(n, fs, &[Component { shape: &shape, variance: 1.0 }], rng);
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var > 0.0 {
        let sd = var.sqrt();
        x.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    x
}

/// Raised-cosine bump on `[lo, hi]`, peaking mid-band.
pub fn band_bump(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |f: f64| {
        if f <= lo || f >= hi {
            0.0
        } else {
            let t = (f - lo) / (hi - lo);
            (std::f64::consts::PI * t).sin()
        }
    }
}
