//! Run configuration read from a single JSON file. Every field is optional
//! and falls back to the documented default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::Hyperparams;
use crate::error::Result;
use crate::eval::{Cell, Experiment, SelectionSpec};
use crate::features::FeatureConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub features: FeatureConfig,
    pub hyper: Hyperparams,
    pub selection: SelectionSpec,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            features: FeatureConfig::default(),
            hyper: Hyperparams::default(),
            selection: SelectionSpec::default(),
            outer_folds: 10,
            inner_folds: 9,
            reps: 100,
            seed: 0,
            workers: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn experiment(&self, cells: Vec<Cell>) -> Experiment {
        Experiment {
            selection: self.selection,
            cells,
            hyper: self.hyper,
            outer_folds: self.outer_folds,
            inner_folds: self.inner_folds,
        }
    }

    pub fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}
