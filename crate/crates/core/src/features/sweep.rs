use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelId;
use crate::error::Result;

use super::{select_top_k, FeatureGroup, FeatureMatrix, RankedFeatures};

/// Scores a channel subset of one feature group, returning one accuracy per
/// classifier.
pub trait SubsetEvaluator: Sync {
    fn evaluate(&self, mat: &FeatureMatrix, group: FeatureGroup, channels: &[ChannelId]) -> Result<Vec<f64>>;
}

impl<F> SubsetEvaluator for F
where
    F: Fn(&FeatureMatrix, FeatureGroup, &[ChannelId]) -> Result<Vec<f64>> + Sync,
{
    fn evaluate(&self, mat: &FeatureMatrix, group: FeatureGroup, channels: &[ChannelId]) -> Result<Vec<f64>> {
        self(mat, group, channels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub best_k: usize,
    /// Mean accuracy over classifiers for k = 1, 2, ….
    pub curve: Vec<f64>,
    /// Per-k accuracies of each classifier.
    pub per_classifier: Vec<Vec<f64>>,
}

/// Evaluates the top-k prefixes of `ranked` for every k and picks the k with
/// the highest mean accuracy; the smallest k wins ties.
pub fn sweep_feature_count(
    mat: &FeatureMatrix,
    ranked: &RankedFeatures,
    eval: &dyn SubsetEvaluator,
) -> Result<SweepResult> {
    let per_classifier: Vec<Vec<f64>> = (1..=ranked.order.len())
        .into_par_iter()
        .map(|k| eval.evaluate(mat, ranked.group, &select_top_k(ranked, k)?))
        .collect::<Result<_>>()?;
    let curve: Vec<f64> = per_classifier
        .iter()
        .map(|accs| accs.iter().sum::<f64>() / accs.len().max(1) as f64)
        .collect();
    let mut best_k = 1;
    for (i, &v) in curve.iter().enumerate() {
        if v > curve[best_k - 1] {
            best_k = i + 1;
        }
    }
    Ok(SweepResult { best_k, curve, per_classifier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Label;

    fn ranked() -> RankedFeatures {
        RankedFeatures { group: FeatureGroup::Hfd, order: ChannelId::ALL.to_vec(), scores: vec![0.0; 18] }
    }

    fn mat() -> FeatureMatrix {
        FeatureMatrix::from_fn(vec!["a".into(), "b".into()], vec![Label::Healthy, Label::Depressed], |_, _, _| Some(0.0))
            .unwrap()
    }

    #[test]
    fn flat_curve_prefers_smallest_k() {
        let eval = |_: &FeatureMatrix, _: FeatureGroup, _: &[ChannelId]| Ok(vec![0.5; 5]);
        let r = sweep_feature_count(&mat(), &ranked(), &eval).unwrap();
        assert_eq!(r.best_k, 1);
        assert_eq!(r.curve.len(), 18);
        assert_eq!(r.per_classifier[17].len(), 5);
    }

    #[test]
    fn picks_the_peak() {
        let eval = |_: &FeatureMatrix, _: FeatureGroup, ch: &[ChannelId]| {
            let v = if ch.len() == 4 || ch.len() == 9 { 0.9 } else { 0.6 };
            Ok(vec![v, v, v, v, 0.5])
        };
        let r = sweep_feature_count(&mat(), &ranked(), &eval).unwrap();
        assert_eq!(r.best_k, 4);
    }

    #[test]
    fn evaluator_errors_propagate() {
        let eval = |_: &FeatureMatrix, _: FeatureGroup, ch: &[ChannelId]| {
            if ch.len() == 7 { Err(crate::Error::Degenerate("boom".into())) } else { Ok(vec![0.5]) }
        };
        assert!(sweep_feature_count(&mat(), &ranked(), &eval).is_err());
    }
}
