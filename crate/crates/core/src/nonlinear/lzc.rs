use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    #[default]
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LzcConfig {
    pub threshold: Threshold,
    /// Logarithm base `a` of the normalization `b(N) = N / log_a N`.
    pub log_base: f64,
}

impl Default for LzcConfig {
    fn default() -> Self {
        LzcConfig {
            threshold: Threshold::Median,
            log_base: 2.0,
        }
    }
}

/// `s(n) = 1` where `x(n) > m`, else `0`, with `m` the segment median or
/// mean.
pub fn binarize(x: &[f64], cfg: &LzcConfig) -> Vec<bool> {
    if x.is_empty() {
        return Vec::new();
    }
    let m = match cfg.threshold {
        Threshold::Mean => x.iter().sum::<f64>() / x.len() as f64,
        Threshold::Median => {
            let mut sorted = x.to_vec();
            sorted.sort_by(f64::total_cmp);
            let h = sorted.len() / 2;
            if sorted.len() % 2 == 1 {
                sorted[h]
            } else {
                0.5 * (sorted[h - 1] + sorted[h])
            }
        }
    };
    x.iter().map(|&v| v > m).collect()
}

/// Number of phrases in the Lempel–Ziv (1976) exhaustive-history parsing
/// of `s`, counted with the Kaspar–Schuster scan. A trailing phrase that
/// is already reproducible from the history still counts.
pub fn lz76_count(s: &[bool]) -> usize {
    let n = s.len();
    if n < 2 {
        return n;
    }
    let (mut c, mut l, mut i, mut k, mut k_max) = (1, 1, 0, 1, 1);
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// Normalized complexity `C(N) = c(N) · log_a(N) / N`.
pub fn lzc(s: &[bool], cfg: &LzcConfig) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return param("Lempel-Ziv complexity needs at least two symbols");
    }
    if !(cfg.log_base > 1.0) {
        return param("log base must exceed 1");
    }
    let nf = n as f64;
    Ok(lz76_count(s) as f64 * nf.log(cfg.log_base) / nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|b| b == b'1').collect()
    }

    #[test]
    fn binarize_examples() {
        let cfg = LzcConfig::default();
        assert_eq!(binarize(&[1.0, 2.0, 3.0, 4.0], &cfg), bits("0011"));
        assert!(binarize(&[5.0; 10], &cfg).iter().all(|b| !b));
        let x = [-3.0, 1.0, -0.5, 0.5, 3.0, -1.0];
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = binarize(&x, &cfg);
        let b = binarize(&flipped, &cfg);
        assert!(a.iter().zip(&b).all(|(p, q)| p != q));
    }

    #[test]
    fn known_parsings() {
        // 0·001·10·100·1000·101 (Lempel & Ziv's example sequence)
        assert_eq!(lz76_count(&bits("0001101001000101")), 6);
        assert_eq!(lz76_count(&bits("0000000000")), 2);
        assert_eq!(lz76_count(&bits("0101010101")), 3);
        assert_eq!(lz76_count(&bits("1")), 1);
        assert_eq!(lz76_count(&[]), 0);
    }

    #[test]
    fn all_zero_normalized_vanishes() {
        let cfg = LzcConfig::default();
        let small = lzc(&vec![false; 64], &cfg).unwrap();
        let large = lzc(&vec![false; 4096], &cfg).unwrap();
        assert!(large < small && large < 0.01);
        assert!(lzc(&[true], &cfg).is_err());
    }
}
