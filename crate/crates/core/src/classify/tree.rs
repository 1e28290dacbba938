use serde::{Deserialize, Serialize};

use crate::signal::cmp_f64;

/// Binary CART node; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf { label: f64 },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: Node,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

fn majority(y: &[f64], idx: &[usize]) -> f64 {
    if idx.iter().map(|&i| y[i]).sum::<f64>() > 0.0 { 1.0 } else { -1.0 }
}

fn grow(x: &[Vec<f64>], y: &[f64], idx: Vec<usize>, min_leaf: usize, depth_left: Option<usize>) -> Node {
    let n = idx.len() as f64;
    let pos = idx.iter().filter(|&&i| y[i] > 0.0).count() as f64;
    if pos == 0.0 || pos == n || idx.len() < 2 * min_leaf || depth_left == Some(0) {
        return Node::Leaf { label: majority(y, &idx) };
    }
    let d = x[idx[0]].len();
    // (impurity, feature, threshold)
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..d {
        let mut order = idx.clone();
        order.sort_by(|&a, &b| cmp_f64(&x[a][f], &x[b][f]).then(a.cmp(&b)));
        let mut left_pos = 0.0;
        for s in 1..order.len() {
            if y[order[s - 1]] > 0.0 {
                left_pos += 1.0;
            }
            let (lo, hi) = (x[order[s - 1]][f], x[order[s]][f]);
            if !(hi > lo) || s < min_leaf || order.len() - s < min_leaf {
                continue;
            }
            let nl = s as f64;
            let nr = n - nl;
            let imp = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / n;
            if best.is_none_or(|(b, _, _)| imp < b) {
                let mid = lo + (hi - lo) / 2.0;
                best = Some((imp, f, mid));
            }
        }
    }
    match best {
        None => Node::Leaf { label: majority(y, &idx) },
        Some((_, feature, threshold)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
            let next = depth_left.map(|d| d - 1);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow(x, y, l, min_leaf, next)),
                right: Box::new(grow(x, y, r, min_leaf, next)),
            }
        }
    }
}

impl Tree {
    pub fn fit(x: &[Vec<f64>], y: &[f64], min_leaf: usize, max_depth: Option<usize>) -> Self {
        Tree { root: grow(x, y, (0..x.len()).collect(), min_leaf.max(1), max_depth) }
    }

    pub fn decision(&self, q: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    node = if q[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }
}
