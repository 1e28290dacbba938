use serde::{Deserialize, Serialize};

/// Per-column centring and scaling learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Columns with no spread; these pass through unchanged.
    pub constant: Vec<bool>,
}

impl Standardizer {
    /// Column means and sample standard deviations of `rows`.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        let mut constant = vec![false; d];
        for j in 0..d {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = if rows.len() > 1 {
                rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let sd = var.sqrt();
            if sd > 1e-12 * m.abs().max(1.0) {
                mean[j] = m;
                scale[j] = sd;
            } else {
                constant[j] = true;
            }
        }
        Standardizer { mean, scale, constant }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter().zip(&self.scale)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }

    pub fn any_constant(&self) -> bool {
        self.constant.iter().any(|c| *c)
    }
}

/// Fits on `train` and transforms both sets with the training statistics.
pub fn standardize_fit_apply(train: &[Vec<f64>], test: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Standardizer) {
    let s = Standardizer::fit(train);
    (s.apply_all(train), s.apply_all(test), s)
}
