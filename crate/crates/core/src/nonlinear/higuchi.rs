use serde::{Deserialize, Serialize};

use crate::error::{degenerate, param, Result};

use super::ols;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HfdConfig {
    pub k_max: usize,
}

impl Default for HfdConfig {
    fn default() -> Self {
        HfdConfig { k_max: 8 }
    }
}

/// Higuchi dimension of one segment. `flat` marks a constant segment, for
/// which every curve length is zero and the dimension is reported as 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfdEstimate {
    pub dimension: f64,
    pub flat: bool,
}

/// Slope of `log L(k)` against `log(1/k)` for `k = 1..=k_max`, where
/// `L(k)` is the mean normalized length of the `k` decimated sub-curves
/// `x[m], x[m+k], x[m+2k], ...`.
pub fn higuchi_fd(x: &[f64], cfg: &HfdConfig) -> Result<HfdEstimate> {
    let n = x.len();
    let k_max = cfg.k_max;
    if k_max < 2 || 2 * k_max >= n {
        return param(format!("k_max = {k_max} must satisfy 2 <= k_max < N/2 (N = {n})"));
    }
    if n < 10 * k_max {
        return param(format!("segment of {n} samples too short for k_max = {k_max}"));
    }

    let mut log_inv_k = Vec::with_capacity(k_max);
    let mut log_len = Vec::with_capacity(k_max);
    let mut zero_lengths = 0;
    for k in 1..=k_max {
        let mut total = 0.0;
        for m in 0..k {
            let steps = (n - 1 - m) / k;
            let mut sum = 0.0;
            for i in 1..=steps {
                sum += (x[m + i * k] - x[m + (i - 1) * k]).abs();
            }
            total += sum * (n - 1) as f64 / (steps * k) as f64 / k as f64;
        }
        let l = total / k as f64;
        if l == 0.0 {
            zero_lengths += 1;
        }
        log_inv_k.push(-(k as f64).ln());
        log_len.push(l.ln());
    }
    if zero_lengths == k_max {
        return Ok(HfdEstimate { dimension: 1.0, flat: true });
    }
    if zero_lengths > 0 {
        return degenerate("zero curve length at some scales");
    }
    let (slope, _, _) = ols(&log_inv_k, &log_len);
    Ok(HfdEstimate { dimension: slope, flat: false })
}
