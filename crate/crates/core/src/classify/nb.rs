use serde::{Deserialize, Serialize};

/// Gaussian naive Bayes with equal class priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Per-feature means, `[healthy, depressed]`.
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl NaiveBayes {
    pub fn fit(x: &[Vec<f64>], y: &[f64], var_floor: f64) -> Self {
        let d = x[0].len();
        let mut means = [vec![0.0; d], vec![0.0; d]];
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        for k in 0..2 {
            let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| (l > 0.0) as usize == k).map(|(r, _)| r).collect();
            let n = rows.len() as f64;
            for j in 0..d {
                let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                means[k][j] = m;
                variances[k][j] = v.max(var_floor);
            }
        }
        NaiveBayes { means, variances }
    }

    /// Log-likelihood ratio, depressed over healthy.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let ll = |k: usize| -> f64 {
            x.iter()
                .enumerate()
                .map(|(j, v)| {
                    let var = self.variances[k][j];
                    -0.5 * ((v - self.means[k][j]).powi(2) / var + var.ln())
                })
                .sum()
        };
        ll(1) - ll(0)
    }
}
