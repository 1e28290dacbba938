use serde::{Deserialize, Serialize};

use crate::error::{degenerate, param, Result};

use super::ols;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DfaConfig {
    /// Ascending box sizes in samples.
    pub box_sizes: Vec<usize>,
    /// Order of the polynomial removed from each box (1 = DFA-1).
    pub detrend_order: usize,
}

impl Default for DfaConfig {
    /// 12 log-spaced boxes from 10 to 500 samples, linear detrending.
    fn default() -> Self {
        DfaConfig::log_spaced(10, 500, 12, 1)
    }
}

impl DfaConfig {
    /// `count` box sizes spaced evenly in `log n` between `min` and `max`,
    /// rounded and de-duplicated.
    pub fn log_spaced(min: usize, max: usize, count: usize, detrend_order: usize) -> Self {
        let mut box_sizes: Vec<usize> = (0..count)
            .map(|i| {
                let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
                (min as f64 * (max as f64 / min as f64).powf(t)).round() as usize
            })
            .collect();
        box_sizes.dedup();
        DfaConfig {
            box_sizes,
            detrend_order,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let b = &self.box_sizes;
        if b.len() < 8 {
            return param(format!("DFA needs at least 8 box sizes, got {}", b.len()));
        }
        if b.windows(2).any(|w| w[0] >= w[1]) {
            return param("DFA box sizes must be strictly ascending");
        }
        let min_box = 4.max(self.detrend_order + 2);
        if b[0] < min_box {
            return param(format!("smallest DFA box must be at least {min_box}"));
        }
        let max_box = *b.last().unwrap();
        if n < 4 * max_box {
            return param(format!("segment of {n} samples shorter than 4 x largest box {max_box}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaResult {
    /// Scaling exponent: slope of `log F(n)` on `log n`.
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub fluctuations: Vec<f64>,
}

/// Orthonormal polynomial basis of degree `<= order` over `0..n`.
fn poly_basis(n: usize, order: usize) -> Vec<Vec<f64>> {
    let centre = (n as f64 - 1.0) / 2.0;
    let scale = centre.max(1.0);
    let t: Vec<f64> = (0..n).map(|i| (i as f64 - centre) / scale).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for d in 0..=order {
        let mut v: Vec<f64> = t.iter().map(|x| x.powi(d as i32)).collect();
        // two Gram-Schmidt passes keep the basis orthogonal to rounding error
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    basis
}

/// Detrended fluctuation analysis: integrate the mean-removed signal, cut
/// the profile into non-overlapping boxes of each size, remove a
/// polynomial trend per box, and regress the log RMS residual on the log
/// box size.
pub fn dfa(x: &[f64], cfg: &DfaConfig) -> Result<DfaResult> {
    let n = x.len();
    cfg.validate(n)?;
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in x {
        acc += v - mean;
        profile.push(acc);
    }

    let mut fluctuations = Vec::with_capacity(cfg.box_sizes.len());
    let mut resid = Vec::new();
    for &size in &cfg.box_sizes {
        let basis = poly_basis(size, cfg.detrend_order);
        let boxes = n / size;
        let mut ms = 0.0;
        for b in 0..boxes {
            let y = &profile[b * size..(b + 1) * size];
            resid.clear();
            resid.extend_from_slice(y);
            for q in &basis {
                let dot: f64 = y.iter().zip(q).map(|(a, c)| a * c).sum();
                resid.iter_mut().zip(q).for_each(|(r, c)| *r -= dot * c);
            }
            ms += resid.iter().map(|r| r * r).sum::<f64>() / size as f64;
        }
        fluctuations.push((ms / boxes as f64).sqrt());
    }
    if fluctuations.iter().any(|f| !(*f > 0.0)) {
        return degenerate("zero fluctuation (constant or polynomial signal)");
    }
    let log_n: Vec<f64> = cfg.box_sizes.iter().map(|&s| (s as f64).ln()).collect();
    let log_f: Vec<f64> = fluctuations.iter().map(|f| f.ln()).collect();
    let (alpha, intercept, r_squared) = ols(&log_n, &log_f);
    Ok(DfaResult {
        alpha,
        intercept,
        r_squared,
        fluctuations,
    })
}
