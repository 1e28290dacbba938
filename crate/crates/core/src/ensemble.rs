//! Weighted voting over the per-group member classifiers and the three ways
//! of choosing the weights.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::eval::make_folds;
use crate::signal::Label;

/// Cap on the weighted error used in `α = ½·ln((1−ε)/ε)`.
pub const MIN_BOOST_ERROR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    Majority,
    Weighted,
    Adaboost,
}

impl VoteMode {
    pub const ALL: [VoteMode; 3] = [VoteMode::Majority, VoteMode::Weighted, VoteMode::Adaboost];

    pub fn name(self) -> &'static str {
        match self {
            VoteMode::Majority => "majority",
            VoteMode::Weighted => "weighted",
            VoteMode::Adaboost => "adaboost",
        }
    }
}

impl fmt::Display for VoteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VoteMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown vote mode {s}")))
    }
}

/// `y = Σ wᵢ·dᵢ`, summed as (weight for depressed) − (weight for healthy)
/// so that equal weights on a split vote cancel exactly.
pub fn vote_score(decisions: &[Label], weights: &[f64]) -> Result<f64> {
    if decisions.len() != weights.len() {
        return param(format!("{} decisions but {} weights", decisions.len(), weights.len()));
    }
    if decisions.is_empty() {
        return param("vote needs at least one member");
    }
    let side = |label: Label| -> f64 { decisions.iter().zip(weights).filter(|(d, _)| **d == label).map(|(_, w)| w).sum() };
    Ok(side(Label::Depressed) - side(Label::Healthy))
}

/// Depressed iff `y > 0`; a zero score is healthy.
pub fn vote(decisions: &[Label], weights: &[f64]) -> Result<Label> {
    Ok(if vote_score(decisions, weights)? > 0.0 { Label::Depressed } else { Label::Healthy })
}

/// One accepted boosting round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub member: usize,
    pub error: f64,
    pub alpha: f64,
    /// Fraction of training subjects the ensemble gets wrong after this round.
    pub train_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostResult {
    pub weights: Vec<f64>,
    pub rounds: Vec<BoostRound>,
    /// No member beat chance on the first round; weights are all ones.
    pub fallback: bool,
}

fn vote_error(preds: &[Vec<Label>], labels: &[Label], w: &[f64]) -> f64 {
    let wrong = preds
        .iter()
        .zip(labels)
        .filter(|(p, y)| vote(p, w).map(|l| l != **y).unwrap_or(true))
        .count();
    wrong as f64 / labels.len() as f64
}

/// Staged boosting over a fixed pool. `preds[i][m]` is member `m`'s decision
/// on subject `i`. Each round picks the member with the lowest weighted error
/// (lowest index on ties) and adds its `α` to that member's weight. Boosting
/// stops after `max_rounds`, when the best error reaches 0.5, after a
/// zero-error round, or before a round that would raise the ensemble's
/// training error.
pub fn adaboost_weights(preds: &[Vec<Label>], labels: &[Label], max_rounds: usize) -> Result<BoostResult> {
    if preds.len() != labels.len() || labels.is_empty() {
        return param("one prediction row per labelled subject required");
    }
    let m = preds[0].len();
    if m == 0 || preds.iter().any(|p| p.len() != m) {
        return param("prediction rows must have the same non-zero member count");
    }
    let n = labels.len();
    let mut dist = vec![1.0 / n as f64; n];
    let mut weights = vec![0.0; m];
    let mut rounds: Vec<BoostRound> = Vec::new();
    for _ in 0..max_rounds {
        let errors: Vec<f64> = (0..m)
            .map(|j| (0..n).filter(|&i| preds[i][j] != labels[i]).map(|i| dist[i]).sum())
            .collect();
        let (best, eps) = errors
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, e)| if e < acc.1 { (j, e) } else { acc });
        if eps >= 0.5 {
            break;
        }
        let capped = eps.max(MIN_BOOST_ERROR);
        let alpha = 0.5 * ((1.0 - capped) / capped).ln();
        let mut next = weights.clone();
        next[best] += alpha;
        let train_error = vote_error(preds, labels, &next);
        if rounds.last().is_some_and(|r| train_error > r.train_error) {
            break;
        }
        weights = next;
        rounds.push(BoostRound { member: best, error: eps, alpha, train_error });
        if eps == 0.0 {
            break;
        }
        for i in 0..n {
            let agree = if preds[i][best] == labels[i] { 1.0 } else { -1.0 };
            dist[i] *= (-alpha * agree).exp();
        }
        let z: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|d| *d /= z);
    }
    if rounds.is_empty() {
        return Ok(BoostResult { weights: vec![1.0; m], rounds, fallback: true });
    }
    Ok(BoostResult { weights, rounds, fallback: false })
}

/// Inner-CV results and the weights derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFitReport {
    pub mode: VoteMode,
    /// Out-of-fold accuracy of each member; absent in majority mode.
    pub accuracies: Option<Vec<f64>>,
    pub weights: Vec<f64>,
    pub boosting: Option<BoostResult>,
    pub flags: Vec<String>,
}

/// Trains member `m` on one set of rows and predicts another. Row indices
/// refer to the caller's training table.
pub trait MemberTrainer: Sync {
    fn n_members(&self) -> usize;
    fn fit_predict(&self, member: usize, train: &[usize], test: &[usize]) -> Result<Vec<Label>>;
}

/// Weights from out-of-fold member predictions `preds[i][m]`.
pub fn weights_from_predictions(mode: VoteMode, preds: &[Vec<Label>], labels: &[Label]) -> Result<WeightFitReport> {
    let m = preds.first().map_or(0, Vec::len);
    let accuracies: Vec<f64> = (0..m)
        .map(|j| preds.iter().zip(labels).filter(|(p, y)| p[j] == **y).count() as f64 / labels.len() as f64)
        .collect();
    let mut flags = Vec::new();
    let (weights, boosting) = match mode {
        VoteMode::Majority => (vec![1.0; m], None),
        VoteMode::Weighted => (accuracies.clone(), None),
        VoteMode::Adaboost => {
            let b = adaboost_weights(preds, labels, m)?;
            if b.fallback {
                flags.push("no member beat chance; majority weights used".to_string());
            }
            (b.weights.clone(), Some(b))
        }
    };
    Ok(WeightFitReport { mode, accuracies: Some(accuracies), weights, boosting, flags })
}

/// Fits vote weights on a training table with a class-balanced inner CV of
/// `min(max_folds, smaller class size)` folds. Majority mode skips the inner
/// CV.
pub fn fit_weights_inner_cv(
    ids: &[String],
    labels: &[Label],
    members: &dyn MemberTrainer,
    mode: VoteMode,
    max_folds: usize,
    seed: u64,
) -> Result<WeightFitReport> {
    let m = members.n_members();
    if mode == VoteMode::Majority {
        return Ok(WeightFitReport { mode, accuracies: None, weights: vec![1.0; m], boosting: None, flags: Vec::new() });
    }
    let pos = labels.iter().filter(|l| **l == Label::Depressed).count();
    let n_folds = max_folds.min(pos).min(labels.len() - pos);
    let plan = make_folds(ids, labels, n_folds, seed)?;
    let per_member: Vec<Vec<Label>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![Label::Healthy; labels.len()];
            for k in 0..plan.n_folds() {
                let test = plan.test_rows(k);
                let pred = members.fit_predict(j, &plan.train_rows(k), test)?;
                for (&r, p) in test.iter().zip(pred) {
                    out[r] = p;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let preds: Vec<Vec<Label>> = (0..labels.len()).map(|i| per_member.iter().map(|p| p[i]).collect()).collect();
    weights_from_predictions(mode, &preds, labels)
}
