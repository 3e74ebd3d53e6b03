use serde::{Deserialize, Serialize};

use crate::models::N_CLASSES;

/// Confusion counts (`confusion[truth][pred]`) and derived scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
    pub precision: [f64; N_CLASSES],
    pub recall: [f64; N_CLASSES],
    pub f1: [f64; N_CLASSES],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

impl Metrics {
    pub fn from_confusion(confusion: [[u64; N_CLASSES]; N_CLASSES]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let correct: u64 = (0..N_CLASSES).map(|c| confusion[c][c]).sum();
        let mut precision = [0.0; N_CLASSES];
        let mut recall = [0.0; N_CLASSES];
        let mut f1 = [0.0; N_CLASSES];
        for c in 0..N_CLASSES {
            let tp = confusion[c][c] as f64;
            let predicted: u64 = (0..N_CLASSES).map(|t| confusion[t][c]).sum();
            let actual: u64 = confusion[c].iter().sum();
            precision[c] = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
            recall[c] = if actual > 0 { tp / actual as f64 } else { 0.0 };
            let s = precision[c] + recall[c];
            f1[c] = if s > 0.0 { 2.0 * precision[c] * recall[c] / s } else { 0.0 };
        }
        let avg = |v: &[f64; N_CLASSES]| (v[0] + v[1] + v[2]) / N_CLASSES as f64;
        Metrics {
            confusion,
            precision,
            recall,
            f1,
            macro_precision: avg(&precision),
            macro_recall: avg(&recall),
            macro_f1: avg(&f1),
            accuracy: if total > 0 { correct as f64 / total as f64 } else { 0.0 },
        }
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

/// Score predictions against truth. Both slices hold class indices.
pub fn metrics(predictions: &[usize], truth: &[usize]) -> Metrics {
    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (&p, &t) in predictions.iter().zip(truth) {
        confusion[t][p] += 1;
    }
    Metrics::from_confusion(confusion)
}
