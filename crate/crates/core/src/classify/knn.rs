use serde::{Deserialize, Serialize};

use crate::signal::cmp_f64;

/// k-nearest-neighbour vote under Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[f64], k: usize) -> Self {
        Knn { k: k.clamp(1, x.len()), x: x.to_vec(), y: y.to_vec() }
    }

    /// Sum of the neighbours' ±1 labels. Equal distances prefer the lower
    /// training index.
    pub fn decision(&self, q: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
            .collect();
        d.sort_by(|a, b| cmp_f64(&a.0, &b.0).then(a.1.cmp(&b.1)));
        d[..self.k].iter().map(|&(_, i)| self.y[i]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_neighbour_and_ties() {
        let x = vec![vec![0.0], vec![2.0], vec![4.0]];
        let y = vec![-1.0, 1.0, -1.0];
        assert_eq!(Knn::fit(&x, &y, 1).decision(&[1.9]), 1.0);
        // equidistant from rows 1 and 2: the lower index wins
        assert_eq!(Knn::fit(&x, &y, 1).decision(&[3.0]), 1.0);
        assert_eq!(Knn::fit(&x, &y, 9).k, 3);
    }
}
