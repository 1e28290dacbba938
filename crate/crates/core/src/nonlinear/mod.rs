//! Nonlinear complexity measures computed per segment: Higuchi fractal
//! dimension, Lempel–Ziv complexity and detrended fluctuation analysis.

mod dfa;
mod higuchi;
mod lzc;

pub use dfa::{dfa, DfaConfig, DfaResult};
pub use higuchi::{higuchi_fd, HfdConfig, HfdEstimate};
pub use lzc::{binarize, lz76_count, lzc, LzcConfig, Threshold};

/// Ordinary least-squares slope, intercept and R² of `y` on `x`.
pub(crate) fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}
