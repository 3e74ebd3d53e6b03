use serde::{Deserialize, Serialize};

use super::N_CLASSES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

/// Gaussian naive Bayes with add-one smoothed priors. Classes absent from
/// the training rows are never predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub classes: Vec<Option<ClassModel>>,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], var_floor: f64) -> Self {
        let n = x.len() as f64;
        let d = x.first().map_or(0, Vec::len);
        let classes = (0..N_CLASSES)
            .map(|c| {
                let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
                if rows.is_empty() {
                    return None;
                }
                let m = rows.len() as f64;
                let mut mean = vec![0.0; d];
                for r in &rows {
                    for j in 0..d {
                        mean[j] += r[j];
                    }
                }
                mean.iter_mut().for_each(|v| *v /= m);
                let mut var = vec![0.0; d];
                for r in &rows {
                    for j in 0..d {
                        var[j] += (r[j] - mean[j]).powi(2);
                    }
                }
                var.iter_mut().for_each(|v| *v = (*v / m).max(var_floor).max(f64::MIN_POSITIVE));
                Some(ClassModel { log_prior: ((m + 1.0) / (n + N_CLASSES as f64)).ln(), mean, var })
            })
            .collect();
        GaussianNb { classes }
    }

    pub fn log_posterior(&self, x: &[f64]) -> [f64; N_CLASSES] {
        let mut out = [f64::NEG_INFINITY; N_CLASSES];
        for (c, model) in self.classes.iter().enumerate() {
            if let Some(m) = model {
                let mut lp = m.log_prior;
                for j in 0..x.len() {
                    let v = m.var[j];
                    lp -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (x[j] - m.mean[j]).powi(2) / (2.0 * v);
                }
                out[c] = lp;
            }
        }
        out
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.log_posterior(x))
    }
}

/// Index of the largest value; ties go to the smaller index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}
