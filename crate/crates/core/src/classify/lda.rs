use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, Result};

/// Two-class linear discriminant with pooled covariance and equal priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lda {
    pub weights: Vec<f64>,
    pub threshold: f64,
    /// Ridge added to the pooled covariance diagonal, zero when none was needed.
    pub ridge: f64,
}

impl Lda {
    /// `y` holds ±1. `ridge_factor` scales `trace / d` when the covariance is
    /// singular.
    pub fn fit(x: &[Vec<f64>], y: &[f64], ridge_factor: f64) -> Result<Self> {
        let d = x[0].len();
        let mut means = [DVector::zeros(d), DVector::zeros(d)];
        let mut counts = [0.0; 2];
        for (r, &l) in x.iter().zip(y) {
            let k = (l > 0.0) as usize;
            means[k] += DVector::from_column_slice(r);
            counts[k] += 1.0;
        }
        means[0] /= counts[0];
        means[1] /= counts[1];
        let mut cov = DMatrix::zeros(d, d);
        for (r, &l) in x.iter().zip(y) {
            let v = DVector::from_column_slice(r) - &means[(l > 0.0) as usize];
            cov += &v * v.transpose();
        }
        cov /= (x.len() as f64 - 2.0).max(1.0);

        let eig = SymmetricEigen::new(cov.clone()).eigenvalues;
        let max = eig.max();
        let min = eig.min();
        let mut ridge = 0.0;
        if !(min > 1e-10 * max.max(0.0)) || max <= 0.0 {
            let trace = cov.trace();
            ridge = ridge_factor * if trace > 0.0 { trace / d as f64 } else { 1.0 };
            for i in 0..d {
                cov[(i, i)] += ridge;
            }
        }
        let diff = &means[1] - &means[0];
        let w = match cov.cholesky() {
            Some(ch) => ch.solve(&diff),
            None => return degenerate("pooled covariance is not positive definite after regularization"),
        };
        let mid = (&means[0] + &means[1]) / 2.0;
        Ok(Lda { threshold: w.dot(&mid), weights: w.iter().copied().collect(), ridge })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() - self.threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_boundary_in_one_dimension() {
        let x: Vec<Vec<f64>> = [-1.1, -1.0, -0.9, 0.9, 1.0, 1.1].iter().map(|&v| vec![v]).collect();
        let y = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let m = Lda::fit(&x, &y, 1e-6).unwrap();
        let boundary = m.threshold / m.weights[0];
        assert!(boundary.abs() < 1e-12);
        assert_eq!(m.ridge, 0.0);
    }

    #[test]
    fn singular_covariance_gets_ridge() {
        // more features than subjects
        let x: Vec<Vec<f64>> = (0..4).map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 5) as f64).collect()).collect();
        let y = [-1.0, -1.0, 1.0, 1.0];
        let m = Lda::fit(&x, &y, 1e-6).unwrap();
        assert!(m.ridge > 0.0);
        assert!(m.weights.iter().all(|w| w.is_finite()));
    }
}
