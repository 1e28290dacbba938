use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::seed::rng;
use crate::signal::Label;

/// Assignment of subjects to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    /// Subject ids per fold.
    pub folds: Vec<Vec<String>>,
    /// Row indices per fold, aligned with `folds`.
    pub rows: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn n_folds(&self) -> usize {
        self.rows.len()
    }

    /// Rows outside fold `k`, ascending.
    pub fn train_rows(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn test_rows(&self, k: usize) -> &[usize] {
        &self.rows[k]
    }
}

/// Class-balanced folds. Each class is shuffled with `seed` and dealt round
/// robin; the depressed class continues from the fold where the healthy class
/// stopped so fold sizes differ by at most one.
pub fn make_folds(ids: &[String], labels: &[Label], n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if ids.len() != labels.len() {
        return param("one label per subject required");
    }
    if n_folds < 2 {
        return param("at least 2 folds required");
    }
    if ids.len() < n_folds {
        return param(format!("{} subjects cannot fill {n_folds} folds", ids.len()));
    }
    let mut r = rng(seed);
    let mut rows = vec![Vec::new(); n_folds];
    let mut next = 0;
    for class in [Label::Healthy, Label::Depressed] {
        let mut members: Vec<usize> = (0..ids.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut r);
        for m in members {
            rows[next].push(m);
            next = (next + 1) % n_folds;
        }
    }
    let folds = rows.iter().map(|f| f.iter().map(|&i| ids[i].clone()).collect()).collect();
    Ok(FoldPlan { seed, folds, rows })
}
