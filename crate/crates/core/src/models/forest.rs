use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::N_CLASSES;
use crate::seed::{mix64, rng, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree grown on Gini impurity. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

fn gini(counts: &[usize; N_CLASSES], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize; N_CLASSES]) -> usize {
    let mut best = 0;
    for c in 1..N_CLASSES {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    mtry: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: &mut [usize], rng: &mut Rng) -> usize {
        let mut counts = [0usize; N_CLASSES];
        rows.iter().for_each(|&i| counts[self.y[i]] += 1);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority(&counts) });
        let m = rows.len();
        let parent = gini(&counts, m);
        if parent == 0.0 || m < 2 * self.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(rows, &counts, parent, rng) else {
            return id;
        };
        let mut split = 0;
        for i in 0..m {
            if self.x[rows[i]][feature] <= threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    fn best_split(
        &self,
        rows: &[usize],
        counts: &[usize; N_CLASSES],
        parent: f64,
        rng: &mut Rng,
    ) -> Option<(usize, f64)> {
        let d = self.x[0].len();
        let mut feats: Vec<usize> = (0..d).collect();
        for i in 0..self.mtry.min(d) {
            let j = rng.random_range(i..d);
            feats.swap(i, j);
        }
        let m = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(m);
        for &f in &feats[..self.mtry.min(d)] {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.x[i][f], self.y[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0usize; N_CLASSES];
            for i in 0..m - 1 {
                left[sorted[i].1] += 1;
                let nl = i + 1;
                let nr = m - nl;
                if sorted[i].0 == sorted[i + 1].0 || nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let mut right = *counts;
                for c in 0..N_CLASSES {
                    right[c] -= left[c];
                }
                let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / m as f64;
                if score < parent - 1e-12 && best.is_none_or(|b| score < b.0) {
                    let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
                    let mut thr = lo + (hi - lo) / 2.0;
                    // Adjacent floats can round the midpoint up to `hi`.
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((score, f, thr));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl DecisionTree {
    pub fn fit(x: &[Vec<f64>], y: &[usize], rows: &[usize], mtry: usize, min_leaf: usize, rng: &mut Rng) -> Self {
        let mut g = Grower { x, y, mtry: mtry.max(1), min_leaf: min_leaf.max(1), nodes: Vec::new() };
        let mut rows = rows.to_vec();
        g.grow(&mut rows, rng);
        DecisionTree { nodes: g.nodes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// Bagged CART trees with `floor(sqrt(d))` candidate features per split.
/// Each tree keeps the sorted indices of its out-of-bag training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub oob: Vec<Vec<usize>>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_trees: usize, min_leaf: usize, seed: u64) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let mtry = ((d as f64).sqrt().floor() as usize).max(1);
        let built: Vec<(DecisionTree, Vec<usize>)> = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng(mix64(seed, t as u64));
                let sample: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
                let mut inbag = vec![false; n];
                sample.iter().for_each(|&i| inbag[i] = true);
                let oob = (0..n).filter(|&i| !inbag[i]).collect();
                let tree = if d == 0 {
                    let mut counts = [0usize; N_CLASSES];
                    sample.iter().for_each(|&i| counts[y[i]] += 1);
                    DecisionTree { nodes: vec![Node::Leaf { class: majority(&counts) }] }
                } else {
                    DecisionTree::fit(x, y, &sample, mtry, min_leaf, &mut r)
                };
                (tree, oob)
            })
            .collect();
        let (trees, oob) = built.into_iter().unzip();
        RandomForest { trees, oob }
    }

    pub fn votes(&self, x: &[f64]) -> [usize; N_CLASSES] {
        let mut v = [0usize; N_CLASSES];
        self.trees.iter().for_each(|t| v[t.predict(x)] += 1);
        v
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        majority(&self.votes(x))
    }
}
