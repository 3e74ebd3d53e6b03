//! Correlation-based feature selection.
//!
//! Relevance keeps features whose absolute Pearson correlation with the
//! target (knowledge gain or knowledge state) reaches a threshold. Redundancy
//! pruning then repeatedly resolves the most correlated remaining pair,
//! dropping the member less correlated with the target.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, FEATURE_NAMES};
use crate::{Error, Result};

/// Sample Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least 2 observations".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation, or 0 when either side is constant.
fn pearson_or_zero(x: &[f64], y: &[f64]) -> f64 {
    pearson(x, y).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Gain,
    State,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Gain => "gain",
            Target::State => "state",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gain" | "kg" | "KG" => Ok(Target::Gain),
            "state" | "ks" | "KS" => Ok(Target::State),
            other => Err(Error::InvalidInput(format!("unknown task `{other}` (expected gain or state)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceEntry {
    pub feature: String,
    pub corr_gain: f64,
    pub corr_state: f64,
}

/// Per-feature correlation with knowledge gain and knowledge state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceTable {
    pub entries: Vec<RelevanceEntry>,
}

impl RelevanceTable {
    /// Correlate every column with both targets. Constant columns get 0.
    pub fn compute(matrix: &FeatureMatrix, gain: &[f64], state: &[f64]) -> Result<Self> {
        if gain.len() != matrix.n_rows() || state.len() != matrix.n_rows() {
            return Err(Error::InvalidInput("target length does not match matrix rows".into()));
        }
        let entries = (0..matrix.n_cols())
            .into_par_iter()
            .map(|j| {
                let col = matrix.column(j);
                RelevanceEntry {
                    feature: matrix.columns[j].clone(),
                    corr_gain: pearson_or_zero(&col, gain),
                    corr_state: pearson_or_zero(&col, state),
                }
            })
            .collect();
        Ok(RelevanceTable { entries })
    }

    /// Table for a single target; the other column is left at 0.
    pub fn compute_for(matrix: &FeatureMatrix, rows: &[usize], target: Target, values: &[f64]) -> Self {
        let y: Vec<f64> = rows.iter().map(|&i| values[i]).collect();
        let entries = (0..matrix.n_cols())
            .map(|j| {
                let col: Vec<f64> = rows.iter().map(|&i| matrix.rows[i][j]).collect();
                let r = pearson_or_zero(&col, &y);
                let (corr_gain, corr_state) = match target {
                    Target::Gain => (r, 0.0),
                    Target::State => (0.0, r),
                };
                RelevanceEntry { feature: matrix.columns[j].clone(), corr_gain, corr_state }
            })
            .collect();
        RelevanceTable { entries }
    }

    pub fn corr(&self, feature: &str, target: Target) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| match target {
            Target::Gain => e.corr_gain,
            Target::State => e.corr_state,
        })
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let entries: Vec<RelevanceEntry> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
        for e in &entries {
            for v in [e.corr_gain, e.corr_state] {
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!("{}: correlation {v} outside [-1, 1]", e.feature)));
                }
            }
        }
        Ok(RelevanceTable { entries })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Features retained by a selection step, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub features: Vec<String>,
    pub target: Target,
    pub threshold: f64,
    pub tau: f64,
}

impl FeatureSubset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

fn canonical_rank(name: &str) -> usize {
    crate::features::feature_index(name).unwrap_or(usize::MAX)
}

/// Keep features with `|corr(feature, target)| >= threshold`.
pub fn relevance_filter(table: &RelevanceTable, target: Target, threshold: f64) -> FeatureSubset {
    let mut features: Vec<(usize, usize, String)> = table
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let r = match target {
                Target::Gain => e.corr_gain,
                Target::State => e.corr_state,
            };
            r.abs() >= threshold
        })
        .map(|(pos, e)| (canonical_rank(&e.feature), pos, e.feature.clone()))
        .collect();
    features.sort();
    FeatureSubset { features: features.into_iter().map(|(_, _, f)| f).collect(), target, threshold, tau: 1.0 }
}

/// Greedy redundancy pruning: while some retained pair has `|r| >= tau`,
/// take the pair with the largest `|r|` (ties: earliest pair in canonical
/// order) and drop the member with the smaller `|corr_target|` (ties: the
/// later one). Constant columns never take part in a pair.
pub fn redundancy_prune(
    matrix: &FeatureMatrix,
    rows: &[usize],
    subset: &FeatureSubset,
    tau: f64,
    table: &RelevanceTable,
) -> Result<FeatureSubset> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidInput(format!("tau must lie in (0, 1], got {tau}")));
    }
    let cols: Vec<usize> = subset
        .features
        .iter()
        .map(|f| matrix.column_index(f).ok_or_else(|| Error::UnknownFeature(f.clone())))
        .collect::<Result<_>>()?;
    let data: Vec<Vec<f64>> = cols.iter().map(|&j| rows.iter().map(|&i| matrix.rows[i][j]).collect()).collect();
    for (k, col) in data.iter().enumerate() {
        if col.windows(2).all(|w| w[0] == w[1]) {
            log::warn!(
                "feature {} is constant on the selection rows; excluded from redundancy pairs",
                subset.features[k]
            );
        }
    }
    let n = cols.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let corr: Vec<f64> = pairs.par_iter().map(|&(a, b)| pearson_or_zero(&data[a], &data[b]).abs()).collect();
    let relevance: Vec<f64> =
        subset.features.iter().map(|f| table.corr(f, subset.target).unwrap_or(0.0).abs()).collect();

    let mut alive = vec![true; n];
    loop {
        let mut best: Option<(f64, usize)> = None;
        for (p, &(a, b)) in pairs.iter().enumerate() {
            if !alive[a] || !alive[b] || corr[p] < tau {
                continue;
            }
            // Pairs are enumerated in canonical order, so strict > keeps the earliest on ties.
            if best.is_none_or(|(r, _)| corr[p] > r) {
                best = Some((corr[p], p));
            }
        }
        let Some((_, p)) = best else { break };
        let (a, b) = pairs[p];
        let drop = if relevance[a] < relevance[b] { a } else { b };
        alive[drop] = false;
    }

    Ok(FeatureSubset {
        features: subset.features.iter().zip(&alive).filter(|(_, &keep)| keep).map(|(f, _)| f.clone()).collect(),
        target: subset.target,
        threshold: subset.threshold,
        tau,
    })
}

/// Relevance filtering followed by redundancy pruning on the given rows.
/// `tau >= 1` with no perfectly correlated pair leaves the relevance subset
/// unchanged; without a matrix, `tau` must be 1.
pub fn select(
    table: &RelevanceTable,
    matrix: Option<(&FeatureMatrix, &[usize])>,
    target: Target,
    threshold: f64,
    tau: f64,
) -> Result<FeatureSubset> {
    let subset = relevance_filter(table, target, threshold);
    match matrix {
        Some((m, rows)) => redundancy_prune(m, rows, &subset, tau, table),
        None if tau >= 1.0 => Ok(subset),
        None => Err(Error::InvalidInput("redundancy pruning with tau < 1 needs a feature matrix".into())),
    }
}

/// Feature counts for every `(tau, threshold)` cell, taus outer.
pub fn selection_grid(
    table: &RelevanceTable,
    matrix: Option<(&FeatureMatrix, &[usize])>,
    target: Target,
    taus: &[f64],
    thresholds: &[f64],
) -> Result<Vec<FeatureSubset>> {
    let mut out = Vec::with_capacity(taus.len() * thresholds.len());
    for &tau in taus {
        for &th in thresholds {
            out.push(select(table, matrix, target, th, tau)?);
        }
    }
    Ok(out)
}

/// Relevance table over the canonical feature list with explicit values.
pub fn table_from_values(gain: &[f64], state: &[f64]) -> RelevanceTable {
    RelevanceTable {
        entries: FEATURE_NAMES
            .iter()
            .zip(gain.iter().zip(state))
            .map(|(f, (&g, &s))| RelevanceEntry { feature: f.to_string(), corr_gain: g, corr_state: s })
            .collect(),
    }
}
