use serde::{Deserialize, Serialize};

use crate::stats::{mean, sample_sd};

/// Column-wise z-scoring with statistics from training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let (mut m, mut s) = (Vec::with_capacity(d), Vec::with_capacity(d));
        for j in 0..d {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            m.push(mean(&col));
            s.push(sample_sd(&col));
        }
        Standardizer { mean: m, sd: s }
    }

    /// Constant training columns map to 0.
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}
