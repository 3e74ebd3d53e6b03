use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::format_sig;
use crate::models::{fit, Dataset, ModelKind, ModelSpec};
use crate::seed::{mix64, rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub mda: f64,
    /// 1-based, by descending MDA; ties keep column order.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// In rank order.
    pub entries: Vec<ImportanceEntry>,
}

impl ImportanceReport {
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.rank)
    }

    pub fn mda_of(&self, feature: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.mda)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "mda", "rank"])?;
        for e in &self.entries {
            w.write_record([e.feature.clone(), format_sig(e.mda, 9), e.rank.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean decrease in out-of-bag accuracy when one column is permuted among
/// each tree's out-of-bag rows. Trees without out-of-bag rows are ignored.
pub fn mda_importance(data: &Dataset, spec: &ModelSpec, seed: u64) -> Result<ImportanceReport> {
    if spec.kind != ModelKind::Rf {
        return Err(Error::InvalidInput(format!("permutation importance needs a random forest, got {}", spec.kind)));
    }
    let model = fit(spec, data)?;
    let forest = model.forest().expect("rf spec yields a forest");
    let scored: Vec<(usize, f64)> = forest
        .trees
        .iter()
        .zip(&forest.oob)
        .enumerate()
        .filter(|(_, (_, oob))| !oob.is_empty())
        .map(|(t, (tree, oob))| {
            let hits = oob.iter().filter(|&&i| tree.predict(&data.x[i]) == data.y[i]).count();
            (t, hits as f64 / oob.len() as f64)
        })
        .collect();
    let d = data.n_features();
    let mda: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut total = 0.0;
            let mut row = vec![0.0; d];
            for &(t, base) in &scored {
                let oob = &forest.oob[t];
                let mut perm = oob.clone();
                perm.shuffle(&mut rng(mix64(mix64(seed, t as u64), j as u64)));
                let mut hits = 0;
                for (p, &i) in oob.iter().enumerate() {
                    row.copy_from_slice(&data.x[i]);
                    row[j] = data.x[perm[p]][j];
                    if forest.trees[t].predict(&row) == data.y[i] {
                        hits += 1;
                    }
                }
                total += base - hits as f64 / oob.len() as f64;
            }
            if scored.is_empty() {
                0.0
            } else {
                total / scored.len() as f64
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| mda[b].total_cmp(&mda[a]).then(a.cmp(&b)));
    Ok(ImportanceReport {
        entries: order
            .into_iter()
            .enumerate()
            .map(|(r, j)| ImportanceEntry { feature: data.columns[j].clone(), mda: mda[j], rank: r + 1 })
            .collect(),
    })
}
