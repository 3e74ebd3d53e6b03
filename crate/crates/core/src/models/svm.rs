use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::naive_bayes::argmax;
use super::N_CLASSES;
use crate::seed::{mix64, rng};

/// One-vs-rest linear SVM trained with the Pegasos subgradient method.
/// Each weight vector carries its bias as the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<Option<Vec<f64>>>,
}

impl LinearSvm {
    pub fn fit(x: &[Vec<f64>], y: &[usize], c: f64, epochs: usize, seed: u64) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let lambda = 1.0 / (c.max(1e-12) * n as f64);
        let radius = 1.0 / lambda.sqrt();
        let mut present = [false; N_CLASSES];
        y.iter().for_each(|&c| present[c] = true);
        let mut w: Vec<Vec<f64>> = vec![vec![0.0; d + 1]; N_CLASSES];
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0usize;
        for e in 0..epochs {
            order.shuffle(&mut rng(mix64(seed, e as u64)));
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let shrink = 1.0 - eta * lambda;
                for k in (0..N_CLASSES).filter(|&k| present[k]) {
                    let target = if y[i] == k { 1.0 } else { -1.0 };
                    let wk = &mut w[k];
                    let margin = target * (wk[d] + x[i].iter().zip(wk.iter()).map(|(a, b)| a * b).sum::<f64>());
                    wk.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        for j in 0..d {
                            wk[j] += eta * target * x[i][j];
                        }
                        wk[d] += eta * target;
                    }
                    let norm = wk.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > radius {
                        let s = radius / norm;
                        wk.iter_mut().for_each(|v| *v *= s);
                    }
                }
            }
        }
        LinearSvm { weights: w.into_iter().zip(present).map(|(wk, p)| p.then_some(wk)).collect() }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let d = x.len();
        let scores: Vec<f64> = self
            .weights
            .iter()
            .map(|w| match w {
                Some(w) => w[d] + x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>(),
                None => f64::NEG_INFINITY,
            })
            .collect();
        argmax(&scores)
    }
}
