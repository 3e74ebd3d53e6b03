use serde::{Deserialize, Serialize};

use super::naive_bayes::argmax;
use super::N_CLASSES;

/// Multinomial logistic regression. `weights[k]` holds the `d` feature
/// weights of class `k` followed by its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<Vec<f64>>,
    pub lambda: f64,
}

/// Loss after each accepted step, plus the final gradient norm.
#[derive(Debug, Clone, Default)]
pub struct TrainingTrace {
    pub losses: Vec<f64>,
    pub grad_norm: f64,
}

fn softmax(z: &mut [f64]) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

impl LogisticRegression {
    pub fn zeros(d: usize, lambda: f64) -> Self {
        LogisticRegression { weights: vec![vec![0.0; d + 1]; N_CLASSES], lambda }
    }

    fn scores(&self, x: &[f64]) -> [f64; N_CLASSES] {
        let mut z = [0.0; N_CLASSES];
        for (k, w) in self.weights.iter().enumerate() {
            let d = x.len();
            z[k] = w[d] + x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        }
        z
    }

    pub fn probabilities(&self, x: &[f64]) -> [f64; N_CLASSES] {
        let mut z = self.scores(x);
        softmax(&mut z);
        z
    }

    /// Mean cross-entropy plus `lambda/2 * ||W||^2` over feature weights.
    pub fn loss(&self, x: &[Vec<f64>], y: &[usize]) -> f64 {
        let n = x.len() as f64;
        let mut ce = 0.0;
        for (r, &c) in x.iter().zip(y) {
            let z = self.scores(r);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            ce += lse - z[c];
        }
        ce / n + 0.5 * self.lambda * self.penalty()
    }

    fn penalty(&self) -> f64 {
        self.weights.iter().map(|w| w[..w.len() - 1].iter().map(|v| v * v).sum::<f64>()).sum()
    }

    pub fn gradient(&self, x: &[Vec<f64>], y: &[usize]) -> Vec<Vec<f64>> {
        let n = x.len() as f64;
        let d = self.weights[0].len() - 1;
        let mut g = vec![vec![0.0; d + 1]; N_CLASSES];
        for (r, &c) in x.iter().zip(y) {
            let p = self.probabilities(r);
            for k in 0..N_CLASSES {
                let e = p[k] - if k == c { 1.0 } else { 0.0 };
                for j in 0..d {
                    g[k][j] += e * r[j];
                }
                g[k][d] += e;
            }
        }
        for k in 0..N_CLASSES {
            for j in 0..=d {
                g[k][j] /= n;
                if j < d {
                    g[k][j] += self.lambda * self.weights[k][j];
                }
            }
        }
        g
    }

    /// Full-batch gradient descent with Armijo backtracking, so the loss
    /// never increases between accepted steps.
    pub fn fit(x: &[Vec<f64>], y: &[usize], lambda: f64, iters: usize, step: f64) -> (Self, TrainingTrace) {
        let d = x.first().map_or(0, Vec::len);
        let mut model = Self::zeros(d, lambda);
        let mut loss = model.loss(x, y);
        let mut trace = TrainingTrace { losses: vec![loss], grad_norm: 0.0 };
        let mut eta = step;
        for _ in 0..iters {
            let g = model.gradient(x, y);
            let gnorm2: f64 = g.iter().flatten().map(|v| v * v).sum();
            trace.grad_norm = gnorm2.sqrt();
            if trace.grad_norm < 1e-10 {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let mut cand = model.clone();
                for (wk, gk) in cand.weights.iter_mut().zip(&g) {
                    for (w, gv) in wk.iter_mut().zip(gk) {
                        *w -= eta * gv;
                    }
                }
                let cl = cand.loss(x, y);
                if cl <= loss - 0.5 * eta * gnorm2 {
                    model = cand;
                    loss = cl;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
            trace.losses.push(loss);
            eta = (eta * 2.0).min(step);
        }
        let g = model.gradient(x, y);
        trace.grad_norm = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        (model, trace)
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x))
    }
}
