use serde::{Deserialize, Serialize};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::error::{param, Error, Result};
use crate::signal::{cmp_f64, Label};

use super::{FeatureGroup, FeatureMatrix};

/// Channels of one feature group in descending order of relevance, with the
/// score of each listed channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures {
    pub group: FeatureGroup,
    pub order: Vec<ChannelId>,
    pub scores: Vec<f64>,
}

impl RankedFeatures {
    /// Sorts by descending score; equal scores keep electrode order.
    fn from_scores(group: FeatureGroup, scores: [f64; N_CHANNELS]) -> Self {
        let mut order: Vec<ChannelId> = ChannelId::ALL.to_vec();
        order.sort_by(|a, b| cmp_f64(&scores[b.index()], &scores[a.index()]));
        let scores = order.iter().map(|c| scores[c.index()]).collect();
        RankedFeatures { group, order, scores }
    }

    pub fn score(&self, channel: ChannelId) -> Option<f64> {
        self.order.iter().position(|&c| c == channel).map(|i| self.scores[i])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: RankedFeatures = serde_json::from_str(s)?;
        let mut seen = [false; N_CHANNELS];
        for c in &r.order {
            if std::mem::replace(&mut seen[c.index()], true) {
                return Err(Error::Schema(format!("channel {c} ranked twice")));
            }
        }
        if r.order.len() != r.scores.len() || r.order.is_empty() {
            return Err(Error::Schema("ranking order and scores must be non-empty and equally long".into()));
        }
        Ok(r)
    }
}

/// The group's columns restricted to subjects with no masked cell in it.
fn group_block(mat: &FeatureMatrix, group: FeatureGroup) -> (Vec<[f64; N_CHANNELS]>, Vec<Label>) {
    let rows = mat.complete_rows(group);
    let x = rows
        .iter()
        .map(|&r| {
            let mut v = [0.0; N_CHANNELS];
            for c in ChannelId::ALL {
                v[c.index()] = mat.get(r, group, c).unwrap_or(f64::NAN);
            }
            v
        })
        .collect();
    (x, rows.iter().map(|&r| mat.labels()[r]).collect())
}

fn class_counts(y: &[Label]) -> (usize, usize) {
    let pos = y.iter().filter(|l| **l == Label::Depressed).count();
    (y.len() - pos, pos)
}

/// One-way ANOVA F statistic of each channel between the two classes.
/// A channel with no within-class spread scores `f64::MAX` if the class means
/// differ and `0` otherwise.
pub fn ftest_rank(mat: &FeatureMatrix, group: FeatureGroup) -> Result<RankedFeatures> {
    let (x, y) = group_block(mat, group);
    let (n_neg, n_pos) = class_counts(&y);
    if n_neg < 2 || n_pos < 2 {
        return param(format!(
            "F-test on {group} needs at least 2 complete subjects per class, got {n_neg} and {n_pos}"
        ));
    }
    let n = y.len() as f64;
    let mut scores = [0.0; N_CHANNELS];
    for (c, score) in scores.iter_mut().enumerate() {
        let mut sums = [0.0; 2];
        let mut counts = [0.0; 2];
        for (row, l) in x.iter().zip(&y) {
            let k = (*l == Label::Depressed) as usize;
            sums[k] += row[c];
            counts[k] += 1.0;
        }
        let means = [sums[0] / counts[0], sums[1] / counts[1]];
        let grand = (sums[0] + sums[1]) / n;
        let between = counts[0] * (means[0] - grand).powi(2) + counts[1] * (means[1] - grand).powi(2);
        let within: f64 = x
            .iter()
            .zip(&y)
            .map(|(row, l)| (row[c] - means[(*l == Label::Depressed) as usize]).powi(2))
            .sum();
        let scale = grand.abs().max(1.0);
        *score = if within > 1e-24 * scale * scale * n {
            between / (within / (n - 2.0))
        } else if between > 1e-24 * scale * scale * n {
            f64::MAX
        } else {
            0.0
        };
    }
    Ok(RankedFeatures::from_scores(group, scores))
}

/// ReliefF weights using every subject as a probe, `k` nearest hits and
/// misses under the Manhattan distance on min-max normalized values. Equal
/// distances prefer the lower row.
pub fn relieff_rank(mat: &FeatureMatrix, group: FeatureGroup, k: usize) -> Result<RankedFeatures> {
    let (x, y) = group_block(mat, group);
    let (n_neg, n_pos) = class_counts(&y);
    if k == 0 {
        return param("ReliefF needs at least one neighbour");
    }
    if n_neg <= k || n_pos <= k {
        return param(format!(
            "ReliefF with k = {k} needs more than {k} complete subjects per class, got {n_neg} and {n_pos}"
        ));
    }
    let n = x.len();
    let mut lo = [f64::INFINITY; N_CHANNELS];
    let mut hi = [f64::NEG_INFINITY; N_CHANNELS];
    for row in &x {
        for c in 0..N_CHANNELS {
            lo[c] = lo[c].min(row[c]);
            hi[c] = hi[c].max(row[c]);
        }
    }
    let z: Vec<[f64; N_CHANNELS]> = x
        .iter()
        .map(|row| {
            let mut v = [0.0; N_CHANNELS];
            for c in 0..N_CHANNELS {
                let range = hi[c] - lo[c];
                v[c] = if range > 0.0 { (row[c] - lo[c]) / range } else { 0.0 };
            }
            v
        })
        .collect();
    let dist = |a: &[f64; N_CHANNELS], b: &[f64; N_CHANNELS]| -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
    };

    let mut w = [0.0; N_CHANNELS];
    let denom = (n * k) as f64;
    for i in 0..n {
        let mut hits: Vec<(f64, usize)> = Vec::new();
        let mut misses: Vec<(f64, usize)> = Vec::new();
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dist(&z[i], &z[j]);
            if y[j] == y[i] { hits.push((d, j)) } else { misses.push((d, j)) }
        }
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| cmp_f64(&a.0, &b.0).then(a.1.cmp(&b.1));
        hits.sort_by(by_dist);
        misses.sort_by(by_dist);
        for c in 0..N_CHANNELS {
            let h: f64 = hits[..k].iter().map(|&(_, j)| (z[i][c] - z[j][c]).abs()).sum();
            let m: f64 = misses[..k].iter().map(|&(_, j)| (z[i][c] - z[j][c]).abs()).sum();
            w[c] += (m - h) / denom;
        }
    }
    Ok(RankedFeatures::from_scores(group, w))
}

/// The first `k` channels of a ranking.
pub fn select_top_k(ranked: &RankedFeatures, k: usize) -> Result<Vec<ChannelId>> {
    if k == 0 || k > ranked.order.len() {
        return param(format!("k must be in 1..={}, got {k}", ranked.order.len()));
    }
    Ok(ranked.order[..k].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Matrix whose `group` columns come from `cols(row, channel)`.
    pub(crate) fn matrix(labels: &[i64], group: FeatureGroup, cols: impl Fn(usize, usize) -> f64) -> FeatureMatrix {
        FeatureMatrix::from_fn(
            (0..labels.len()).map(|i| format!("s{i}")).collect(),
            labels.iter().map(|&l| Label::from_sign(l).unwrap()).collect(),
            |r, g, c| (g == group).then(|| cols(r, c.index())),
        )
        .unwrap()
    }

    #[test]
    fn ftest_matches_closed_form_anova() {
        // channel 0: healthy {1, 3}, depressed {4, 8}
        // means 2 and 6, grand 4; SSB = 2·2² + 2·2² = 16; SSW = 2 + 8 = 10
        // F = 16 / (10 / 2) = 3.2
        let data = [[1.0, 0.0], [3.0, 0.5], [4.0, 0.25], [8.0, 0.75]];
        let m = matrix(&[-1, -1, 1, 1], FeatureGroup::Hfd, |r, c| if c < 2 { data[r][c] } else { 7.0 });
        let ranked = ftest_rank(&m, FeatureGroup::Hfd).unwrap();
        assert!((ranked.score(ChannelId::Fp1).unwrap() - 3.2).abs() < 1e-9);
        // channel 1: means 0.25, 0.5; grand 0.375; SSB = 4·0.125² = 0.0625; SSW = 0.125 + 0.125
        assert!((ranked.score(ChannelId::Fp2).unwrap() - 0.0625 / 0.125).abs() < 1e-9);
        assert_eq!(ranked.score(ChannelId::O2), Some(0.0));
        assert_eq!(ranked.order[0], ChannelId::Fp1);
        assert_eq!(ranked.order[1], ChannelId::Fp2);
        assert_eq!(ranked.order[2], ChannelId::F7);
    }

    #[test]
    fn ftest_dominant_channel_first() {
        let m = matrix(&[-1, -1, -1, 1, 1, 1], FeatureGroup::Lzc, |r, c| {
            let s = if r < 3 { -10.0 } else { 10.0 };
            if c == ChannelId::T5.index() { s + 0.1 * (r as f64 % 2.0 - 0.5) } else { ((r * 7 + c * 3) % 5) as f64 }
        });
        assert_eq!(ftest_rank(&m, FeatureGroup::Lzc).unwrap().order[0], ChannelId::T5);
    }

    #[test]
    fn ftest_single_class_rejected() {
        let m = matrix(&[1, 1, 1, 1], FeatureGroup::Lzc, |r, _| r as f64);
        assert!(matches!(ftest_rank(&m, FeatureGroup::Lzc), Err(Error::Parameter(_))));
    }

    #[test]
    fn masked_subjects_are_dropped() {
        let mut m = matrix(&[-1, -1, 1, 1, 1], FeatureGroup::Apv, |r, c| (r * 3 + c) as f64 % 4.0);
        m.set(4, FeatureGroup::Apv, ChannelId::C3, None);
        let a = ftest_rank(&m, FeatureGroup::Apv).unwrap();
        let b = ftest_rank(&m.subset(&[0, 1, 2, 3]), FeatureGroup::Apv).unwrap();
        assert_eq!(a, b);
    }

    /// Step-by-step ReliefF with k = 1 on three subjects per class.
    #[test]
    fn relieff_hand_trace() {
        // two features; ranges 4 and 3
        // healthy: (0,0) (1,3) (2,1); depressed: (3,0) (4,2) (4,3)
        let pts = [[0.0, 0.0], [1.0, 3.0], [2.0, 1.0], [3.0, 0.0], [4.0, 2.0], [4.0, 3.0]];
        let m = matrix(&[-1, -1, -1, 1, 1, 1], FeatureGroup::Sasi, |r, c| if c < 2 { pts[r][c] } else { 0.0 });
        let ranked = relieff_rank(&m, FeatureGroup::Sasi, 1).unwrap();
        // normalized: a=(0,0) b=(.25,1) c=(.5,1/3) d=(.75,0) e=(1,2/3) f=(1,1)
        // nearest hit / miss per probe (Manhattan, ties to lower row):
        //   a: hit c (0.8333) , miss d (0.75)
        //   b: hit c (0.9167) , miss f (0.75)
        //   c: hit a (0.8333) , miss d (0.5833)
        //   d: hit e (0.9167) , miss c (0.5833)
        //   e: hit f (0.3333) , miss c (0.8333)
        //   f: hit e (0.3333) , miss b (0.75)
        // feature 0: misses .75+.75+.25+.25+.5+.75 = 3.25, hits .5+.25+.5+.25+0+0 = 1.5
        // feature 1: misses 0+0+1/3+1/3+1/3+0 = 1, hits 1/3+2/3+1/3+2/3+1/3+1/3 = 8/3
        let w0 = (3.25 - 1.5) / 6.0;
        let w1 = (1.0 - 8.0 / 3.0) / 6.0;
        assert!((ranked.score(ChannelId::Fp1).unwrap() - w0).abs() < 1e-12);
        assert!((ranked.score(ChannelId::Fp2).unwrap() - w1).abs() < 1e-12);
        assert_eq!(ranked.order[0], ChannelId::Fp1);
        assert_eq!(*ranked.order.last().unwrap(), ChannelId::Fp2);
    }

    #[test]
    fn relieff_constant_features_have_zero_weight() {
        let m = matrix(&[-1, -1, -1, -1, 1, 1, 1, 1], FeatureGroup::Dfa, |_, _| 2.5);
        let ranked = relieff_rank(&m, FeatureGroup::Dfa, 3).unwrap();
        assert!(ranked.scores.iter().all(|&s| s == 0.0));
        assert_eq!(ranked.order, ChannelId::ALL.to_vec());
    }

    #[test]
    fn relieff_k_too_large() {
        let m = matrix(&[-1, -1, -1, 1, 1, 1], FeatureGroup::Dfa, |r, c| (r + c) as f64);
        assert!(matches!(relieff_rank(&m, FeatureGroup::Dfa, 3), Err(Error::Parameter(_))));
    }

    #[test]
    fn top_k_prefix_and_bounds() {
        let m = matrix(&[-1, -1, 1, 1], FeatureGroup::Rgp, |r, c| ((r + 1) * (c + 2)) as f64 % 7.0);
        let ranked = ftest_rank(&m, FeatureGroup::Rgp).unwrap();
        assert_eq!(select_top_k(&ranked, 18).unwrap().len(), 18);
        assert_eq!(select_top_k(&ranked, 1).unwrap(), vec![ranked.order[0]]);
        assert!(select_top_k(&ranked, 0).is_err());
        assert!(select_top_k(&ranked, 19).is_err());
    }

    #[test]
    fn json_round_trip() {
        let r = RankedFeatures {
            group: FeatureGroup::BetaRbp,
            order: vec![ChannelId::O1, ChannelId::O2],
            scores: vec![2.0, 1.5],
        };
        let s = r.to_json().unwrap();
        assert!(s.contains("\"B_RBP\"") && s.contains("\"O1\""));
        assert_eq!(RankedFeatures::from_json(&s).unwrap(), r);
        assert_eq!(select_top_k(&r, 2).unwrap(), vec![ChannelId::O1, ChannelId::O2]);
    }
}
