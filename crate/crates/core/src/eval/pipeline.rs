use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classify::{ClassifierKind, Hyperparams};
use crate::ensemble::VoteMode;
use crate::error::{Error, Result};
use crate::features::FeatureGroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    #[default]
    None,
    Ftest,
    Relieff,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 3] = [SelectionMethod::None, SelectionMethod::Ftest, SelectionMethod::Relieff];

    pub fn name(self) -> &'static str {
        match self {
            SelectionMethod::None => "none",
            SelectionMethod::Ftest => "ftest",
            SelectionMethod::Relieff => "relieff",
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "all" => Ok(SelectionMethod::None),
            "ftest" | "f-test" => Ok(SelectionMethod::Ftest),
            "relieff" => Ok(SelectionMethod::Relieff),
            other => Err(Error::Parameter(format!("unknown selection method {other}"))),
        }
    }
}

/// Whether channels are ranked once on all subjects or inside every
/// training fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionScope {
    Global,
    #[default]
    PerFold,
}

impl SelectionScope {
    pub fn name(self) -> &'static str {
        match self {
            SelectionScope::Global => "global",
            SelectionScope::PerFold => "per-fold",
        }
    }
}

impl FromStr for SelectionScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" => Ok(SelectionScope::Global),
            "per-fold" | "per_fold" | "perfold" => Ok(SelectionScope::PerFold),
            other => Err(Error::Parameter(format!("unknown selection scope {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionSpec {
    pub method: SelectionMethod,
    pub scope: SelectionScope,
    /// Channels kept per group; `None` picks the count by sweeping k = 1..18.
    pub count: Option<usize>,
    pub relieff_k: usize,
}

impl Default for SelectionSpec {
    fn default() -> Self {
        SelectionSpec { method: SelectionMethod::None, scope: SelectionScope::PerFold, count: None, relieff_k: 3 }
    }
}

/// What a classifier is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// The selected channels of one feature group.
    Group(FeatureGroup),
    /// The selected channels of all groups side by side.
    Concatenated,
    /// One member per group, combined by vote.
    Ensemble(VoteMode),
}

impl Target {
    pub fn groups(self) -> Vec<FeatureGroup> {
        match self {
            Target::Group(g) => vec![g],
            _ => FeatureGroup::ALL.to_vec(),
        }
    }

    /// `single` for plain classifiers, the vote mode for ensembles.
    pub fn mode_name(self) -> &'static str {
        match self {
            Target::Ensemble(m) => m.name(),
            _ => "single",
        }
    }

    /// Short name without the vote mode.
    pub fn set_name(self) -> &'static str {
        match self {
            Target::Group(g) => g.name(),
            Target::Concatenated => "concatenated",
            Target::Ensemble(_) => "ensemble",
        }
    }

    /// Inverse of `(set_name, mode_name)`.
    pub fn from_parts(set: &str, mode: &str) -> Result<Self> {
        match set.trim().to_ascii_lowercase().as_str() {
            "concatenated" => Ok(Target::Concatenated),
            "ensemble" => Ok(Target::Ensemble(mode.parse()?)),
            _ => Ok(Target::Group(set.parse()?)),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Ensemble(m) => write!(f, "ensemble:{m}"),
            t => f.write_str(t.set_name()),
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((set, mode)) => Target::from_parts(set, mode),
            None => Target::from_parts(s, "single"),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One (target, classifier) entry of a results grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub target: Target,
    pub classifier: ClassifierKind,
}

/// Everything that determines a cross-validated accuracy besides the data
/// and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Experiment {
    pub selection: SelectionSpec,
    pub cells: Vec<Cell>,
    pub hyper: Hyperparams,
    pub outer_folds: usize,
    /// Upper bound on inner folds for weight fitting and count sweeps.
    pub inner_folds: usize,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            selection: SelectionSpec::default(),
            cells: Vec::new(),
            hyper: Hyperparams::default(),
            outer_folds: 10,
            inner_folds: 9,
        }
    }
}

impl Experiment {
    /// Every classifier on every given target.
    pub fn grid(selection: SelectionSpec, targets: &[Target]) -> Self {
        let cells = targets
            .iter()
            .flat_map(|&target| ClassifierKind::ALL.into_iter().map(move |classifier| Cell { target, classifier }))
            .collect();
        Experiment { selection, cells, ..Experiment::default() }
    }

    /// Feature groups any cell needs, in canonical order.
    pub fn groups(&self) -> Vec<FeatureGroup> {
        let mut used = [false; 10];
        for c in &self.cells {
            for g in c.target.groups() {
                used[g.index()] = true;
            }
        }
        FeatureGroup::ALL.into_iter().filter(|g| used[g.index()]).collect()
    }
}
