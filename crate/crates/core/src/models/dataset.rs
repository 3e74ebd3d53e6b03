use serde::{Deserialize, Serialize};

use std::collections::HashMap;

use crate::features::{FeatureMatrix, RowKey};
use crate::knowledge::LabelRow;
use crate::selection::Target;
use crate::{Error, Result};

/// Feature rows with class labels (`0..3`) and, optionally, the continuous
/// target the labels were binned from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub keys: Vec<RowKey>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    /// Continuous target (gain or post score) used for relevance filtering.
    pub target: Vec<f64>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, x: Vec<Vec<f64>>, y: Vec<usize>) -> Self {
        let keys = (0..x.len()).map(|i| RowKey { topic_id: String::new(), user_id: i.to_string() }).collect();
        let target = y.iter().map(|&c| c as f64).collect();
        Dataset { columns, keys, x, y, target }
    }

    pub fn from_matrix(matrix: FeatureMatrix, y: Vec<usize>, target: Vec<f64>) -> Result<Self> {
        let d = Dataset { columns: matrix.columns, keys: matrix.keys, x: matrix.rows, y, target };
        d.validate()?;
        Ok(d)
    }

    /// Join feature rows with labels on `(user_id, topic_id)`. Every row
    /// needs a label; labels without a feature row are ignored.
    pub fn from_labels(matrix: FeatureMatrix, labels: &[LabelRow], target: Target) -> Result<Self> {
        let index: HashMap<(&str, &str), &LabelRow> =
            labels.iter().map(|l| ((l.user_id.as_str(), l.topic_id.as_str()), l)).collect();
        let mut y = Vec::with_capacity(matrix.n_rows());
        let mut values = Vec::with_capacity(matrix.n_rows());
        for k in &matrix.keys {
            let l = index
                .get(&(k.user_id.as_str(), k.topic_id.as_str()))
                .ok_or_else(|| Error::InvalidInput(format!("no label for user {} topic {}", k.user_id, k.topic_id)))?;
            match target {
                Target::Gain => {
                    y.push(l.gain_class.index());
                    values.push(l.gain);
                }
                Target::State => {
                    y.push(l.state_class.index());
                    values.push(l.post_score);
                }
            }
        }
        Self::from_matrix(matrix, y, values)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.len() != self.x.len() || self.target.len() != self.x.len() || self.keys.len() != self.x.len() {
            return Err(Error::InvalidInput(format!(
                "dataset has {} rows but {} labels, {} targets and {} keys",
                self.x.len(),
                self.y.len(),
                self.target.len(),
                self.keys.len()
            )));
        }
        if let Some(&c) = self.y.iter().find(|&&c| c >= super::N_CLASSES) {
            return Err(Error::InvalidInput(format!("class label {c} outside 0..3")));
        }
        for (i, row) in self.x.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} values for {} columns",
                    row.len(),
                    self.columns.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i}: non-finite value in column {}", self.columns[j])));
            }
        }
        Ok(())
    }

    /// Copy of the given rows restricted to the given columns.
    pub fn subset(&self, rows: &[usize], cols: &[usize]) -> Dataset {
        Dataset {
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
            keys: rows.iter().map(|&i| self.keys[i].clone()).collect(),
            x: rows.iter().map(|&i| cols.iter().map(|&j| self.x[i][j]).collect()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            target: rows.iter().map(|&i| self.target[i]).collect(),
        }
    }

    pub fn matrix(&self) -> FeatureMatrix {
        FeatureMatrix { columns: self.columns.clone(), keys: self.keys.clone(), rows: self.x.clone() }
    }

    pub fn column_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.columns.iter().position(|c| c == n).ok_or_else(|| Error::UnknownFeature(n.clone())))
            .collect()
    }
}
