use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::naive_bayes::argmax;
use super::N_CLASSES;
use crate::seed::{mix64, rng};

/// One hidden layer of logistic units feeding a softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// `hidden x d`
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// `3 x hidden`
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn init(d: usize, hidden: usize, seed: u64) -> Self {
        let mut r = rng(mix64(seed, 0));
        let a1 = (6.0 / (d + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + N_CLASSES) as f64).sqrt();
        let w1 = (0..hidden).map(|_| (0..d).map(|_| r.random_range(-a1..=a1)).collect()).collect();
        let w2 = (0..N_CLASSES).map(|_| (0..hidden).map(|_| r.random_range(-a2..=a2)).collect()).collect();
        Mlp { w1, b1: vec![0.0; hidden], w2, b2: vec![0.0; N_CLASSES] }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, [f64; N_CLASSES]) {
        let a: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| sigmoid(b + w.iter().zip(x).map(|(p, q)| p * q).sum::<f64>()))
            .collect();
        let mut z = [0.0; N_CLASSES];
        for k in 0..N_CLASSES {
            z[k] = self.b2[k] + self.w2[k].iter().zip(&a).map(|(p, q)| p * q).sum::<f64>();
        }
        (a, z)
    }

    /// Mean cross-entropy over the rows and its gradient, shaped like `self`.
    pub fn loss_and_grad(&self, x: &[Vec<f64>], y: &[usize]) -> (f64, Mlp) {
        let n = x.len() as f64;
        let mut g = Mlp {
            w1: vec![vec![0.0; self.w1.first().map_or(0, Vec::len)]; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![vec![0.0; self.b1.len()]; N_CLASSES],
            b2: vec![0.0; N_CLASSES],
        };
        let mut loss = 0.0;
        for (r, &c) in x.iter().zip(y) {
            let (a, z) = self.forward(r);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = z.iter().map(|v| (v - m).exp()).sum();
            loss += m + s.ln() - z[c];
            let mut dz = [0.0; N_CLASSES];
            for k in 0..N_CLASSES {
                dz[k] = ((z[k] - m).exp() / s - if k == c { 1.0 } else { 0.0 }) / n;
                g.b2[k] += dz[k];
                for h in 0..a.len() {
                    g.w2[k][h] += dz[k] * a[h];
                }
            }
            for h in 0..a.len() {
                let da: f64 = (0..N_CLASSES).map(|k| self.w2[k][h] * dz[k]).sum();
                let dh = da * a[h] * (1.0 - a[h]);
                g.b1[h] += dh;
                for (gw, xv) in g.w1[h].iter_mut().zip(r) {
                    *gw += dh * xv;
                }
            }
        }
        (loss / n, g)
    }

    pub fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut out: Vec<&mut f64> = self.w1.iter_mut().flatten().collect();
        out.extend(self.b1.iter_mut());
        out.extend(self.w2.iter_mut().flatten());
        out.extend(self.b2.iter_mut());
        out
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.w1.iter().flatten().copied().collect();
        out.extend(&self.b1);
        out.extend(self.w2.iter().flatten());
        out.extend(&self.b2);
        out
    }

    /// Minibatch gradient descent on shuffled rows.
    pub fn fit(x: &[Vec<f64>], y: &[usize], hidden: usize, lr: f64, epochs: usize, batch: usize, seed: u64) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut model = Mlp::init(d, hidden, seed);
        let mut order: Vec<usize> = (0..x.len()).collect();
        for e in 0..epochs {
            order.shuffle(&mut rng(mix64(seed, e as u64 + 1)));
            for chunk in order.chunks(batch.max(1)) {
                let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| x[i].clone()).collect();
                let by: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
                let (_, g) = model.loss_and_grad(&bx, &by);
                for (p, gv) in model.params_mut().into_iter().zip(g.params()) {
                    *p -= lr * gv;
                }
            }
        }
        model
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.forward(x).1)
    }
}
