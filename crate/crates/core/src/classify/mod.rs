//! Five binary classifiers behind one train/predict contract. Inputs are
//! standardized with training statistics; every tie predicts healthy.

mod knn;
mod lda;
mod nb;
mod standardize;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::signal::Label;

pub use knn::Knn;
pub use lda::Lda;
pub use nb::NaiveBayes;
pub use standardize::{standardize_fit_apply, Standardizer};
pub use svm::{Svm, SvmParams};
pub use tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    SvmRbf,
    Lda,
    Nb,
    Knn,
    Tree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] =
        [ClassifierKind::SvmRbf, ClassifierKind::Lda, ClassifierKind::Nb, ClassifierKind::Knn, ClassifierKind::Tree];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::SvmRbf => "svm_rbf",
            ClassifierKind::Lda => "lda",
            ClassifierKind::Nb => "nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Tree => "tree",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "svm" | "svm_rbf" | "svm-rbf" => Ok(ClassifierKind::SvmRbf),
            "lda" => Ok(ClassifierKind::Lda),
            "nb" | "naive_bayes" => Ok(ClassifierKind::Nb),
            "knn" => Ok(ClassifierKind::Knn),
            "tree" => Ok(ClassifierKind::Tree),
            _ => Err(Error::Parameter(format!("unknown classifier {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub standardize: bool,
    pub svm: SvmParams,
    pub lda_ridge: f64,
    pub nb_var_floor: f64,
    pub knn_k: usize,
    pub tree_min_leaf: usize,
    pub tree_max_depth: Option<usize>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            standardize: true,
            svm: SvmParams::default(),
            lda_ridge: 1e-6,
            nb_var_floor: 1e-9,
            knn_k: 5,
            tree_min_leaf: 1,
            tree_max_depth: None,
        }
    }
}

/// Feature rows with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Label>,
}

impl TrainSet {
    /// Requires a rectangular, finite table and at least two rows per class.
    pub fn new(x: Vec<Vec<f64>>, y: Vec<Label>) -> Result<Self> {
        if x.len() != y.len() {
            return param("one label per row required");
        }
        let d = x.first().map_or(0, Vec::len);
        if d == 0 {
            return param("training set has no features");
        }
        if x.iter().any(|r| r.len() != d) {
            return param("training rows differ in length");
        }
        if x.iter().flatten().any(|v| !v.is_finite()) {
            return param("training set contains non-finite values");
        }
        let pos = y.iter().filter(|l| **l == Label::Depressed).count();
        if pos < 2 || y.len() - pos < 2 {
            return param(format!("need at least 2 subjects per class, got {} and {pos}", y.len() - pos));
        }
        Ok(TrainSet { x, y })
    }

    pub fn n_features(&self) -> usize {
        self.x[0].len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    SvmRbf(Svm),
    Lda(Lda),
    Nb(NaiveBayes),
    Knn(Knn),
    Tree(Tree),
}

/// A fitted classifier. Immutable; prediction is pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub n_features: usize,
    pub standardizer: Option<Standardizer>,
    pub params: ModelParams,
    /// Notes on degenerate fits, e.g. constant columns or a ridge-regularized covariance.
    pub flags: Vec<String>,
}

pub fn train(kind: ClassifierKind, set: &TrainSet, hyper: &Hyperparams) -> Result<TrainedModel> {
    let mut flags = Vec::new();
    let (x, standardizer) = if hyper.standardize {
        let s = Standardizer::fit(&set.x);
        if s.any_constant() {
            flags.push("constant columns left unscaled".to_string());
        }
        (s.apply_all(&set.x), Some(s))
    } else {
        (set.x.clone(), None)
    };
    let y: Vec<f64> = set.y.iter().map(|l| l.sign() as f64).collect();
    let params = match kind {
        ClassifierKind::SvmRbf => ModelParams::SvmRbf(Svm::fit(&x, &y, &hyper.svm)?),
        ClassifierKind::Lda => {
            let m = Lda::fit(&x, &y, hyper.lda_ridge)?;
            if m.ridge > 0.0 {
                flags.push(format!("singular pooled covariance, ridge {:e}", m.ridge));
            }
            ModelParams::Lda(m)
        }
        ClassifierKind::Nb => ModelParams::Nb(NaiveBayes::fit(&x, &y, hyper.nb_var_floor)),
        ClassifierKind::Knn => ModelParams::Knn(Knn::fit(&x, &y, hyper.knn_k)),
        ClassifierKind::Tree => ModelParams::Tree(Tree::fit(&x, &y, hyper.tree_min_leaf, hyper.tree_max_depth)),
    };
    Ok(TrainedModel { n_features: set.n_features(), standardizer, params, flags })
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::SvmRbf(_) => ClassifierKind::SvmRbf,
            ModelParams::Lda(_) => ClassifierKind::Lda,
            ModelParams::Nb(_) => ClassifierKind::Nb,
            ModelParams::Knn(_) => ClassifierKind::Knn,
            ModelParams::Tree(_) => ClassifierKind::Tree,
        }
    }

    /// Signed score; positive means depressed.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return param(format!("expected {} features, got {}", self.n_features, x.len()));
        }
        let z;
        let x = match &self.standardizer {
            Some(s) => {
                z = s.apply(x);
                &z[..]
            }
            None => x,
        };
        Ok(match &self.params {
            ModelParams::SvmRbf(m) => m.decision(x),
            ModelParams::Lda(m) => m.decision(x),
            ModelParams::Nb(m) => m.decision(x),
            ModelParams::Knn(m) => m.decision(x),
            ModelParams::Tree(m) => m.decision(x),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let d = self.decision(x)?;
        Ok(if d > 0.0 { Label::Depressed } else { Label::Healthy })
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TrainSet {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![0.5, 0.7], vec![3.0, 2.0], vec![4.0, 2.5], vec![3.5, 1.9]];
        let y = [-1, -1, -1, 1, 1, 1].iter().map(|&s| Label::from_sign(s).unwrap()).collect();
        TrainSet::new(x, y).unwrap()
    }

    #[test]
    fn all_kinds_fit_an_easy_set() {
        let set = toy();
        for kind in ClassifierKind::ALL {
            let hp = Hyperparams { knn_k: 3, ..Hyperparams::default() };
            let m = train(kind, &set, &hp).unwrap();
            assert_eq!(m.kind(), kind);
            assert_eq!(m.predict_many(&set.x).unwrap(), set.y, "{kind}");
            let again = m.predict(&set.x[0]).unwrap();
            assert_eq!(again, m.predict(&set.x[0]).unwrap());
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = train(ClassifierKind::Knn, &toy(), &Hyperparams::default()).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn trainset_validation() {
        let y = vec![Label::Healthy, Label::Depressed, Label::Depressed];
        assert!(TrainSet::new(vec![vec![1.0]; 3], y).is_err());
        assert!(TrainSet::new(vec![vec![f64::NAN]; 4], vec![Label::Healthy; 4]).is_err());
    }

    #[test]
    fn json_dump_names_the_kind() {
        let m = train(ClassifierKind::Tree, &toy(), &Hyperparams::default()).unwrap();
        let s = m.to_json().unwrap();
        assert!(s.contains("\"kind\": \"tree\""));
        let back: TrainedModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn kind_names_parse() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.name().parse::<ClassifierKind>().unwrap(), k);
        }
    }
}
