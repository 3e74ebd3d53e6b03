use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::stratified_kfold;
use super::metrics::{metrics, Metrics};
use crate::features::format_sig;
use crate::models::{fit, Dataset, ModelKind, ModelSpec, N_CLASSES};
use crate::seed::mix64;
use crate::selection::{select, RelevanceTable, Target};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScope {
    /// Refit on the training rows of every fold.
    #[default]
    PerFold,
    /// Fit once on all rows.
    Global,
}

impl FromStr for SelectionScope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_fold" | "per-fold" => Ok(SelectionScope::PerFold),
            "global" => Ok(SelectionScope::Global),
            other => Err(Error::InvalidInput(format!("unknown selection scope {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub target: Target,
    /// Relevance threshold on `|corr|` (beta for gain, gamma for state).
    pub threshold: f64,
    pub tau: f64,
    pub scope: SelectionScope,
}

impl SelectionConfig {
    pub fn new(target: Target, threshold: f64, tau: f64) -> Self {
        SelectionConfig { target, threshold, tau, scope: SelectionScope::PerFold }
    }

    /// Column indices chosen using only `rows`.
    pub fn choose(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
        let matrix = data.matrix();
        let table = RelevanceTable::compute_for(&matrix, rows, self.target, &data.target);
        let subset = select(&table, Some((&matrix, rows)), self.target, self.threshold, self.tau)?;
        data.column_indices(&subset.features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 10, reps: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub spec: ModelSpec,
    pub selection: SelectionConfig,
    pub cv: CvConfig,
    /// Mean selected-feature count over evaluated folds.
    pub n_features: f64,
    /// Wall clock for the whole repeated CV of this cell.
    pub runtime_ms: u64,
    /// Pooled over every fold and repetition.
    pub metrics: Metrics,
    pub fold_mean_accuracy: f64,
    pub fold_mean_macro_f1: f64,
    pub folds_evaluated: usize,
    pub folds_skipped: usize,
}

pub const CSV_HEADER: &str = "Method,tau,threshold,n_features,runtime_ms,\
P_Low,R_Low,F1_Low,P_Moderate,R_Moderate,F1_Moderate,P_High,R_High,F1_High,\
P_Macro,R_Macro,F1_Macro,Accu";

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row under [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let m = &self.metrics;
        let mut row = format!(
            "{},{},{},{},{}",
            self.method,
            format_sig(self.selection.tau, 6),
            format_sig(self.selection.threshold, 6),
            format_sig(self.n_features, 6),
            self.runtime_ms
        );
        for c in 0..N_CLASSES {
            write!(row, ",{:.4},{:.4},{:.4}", m.precision[c], m.recall[c], m.f1[c]).unwrap();
        }
        write!(row, ",{:.4},{:.4},{:.4},{:.4}", m.macro_precision, m.macro_recall, m.macro_f1, m.accuracy).unwrap();
        row
    }
}

struct FoldOutcome {
    pairs: Vec<(usize, usize)>,
    n_features: usize,
}

fn run_fold(
    data: &Dataset,
    spec: &ModelSpec,
    selection: &SelectionConfig,
    global_cols: Option<&[usize]>,
    train: &[usize],
    test: &[usize],
    seed: u64,
) -> Result<Option<FoldOutcome>> {
    let cols: Vec<usize> = if spec.kind == ModelKind::KsZhang {
        (0..data.n_features()).collect()
    } else if let Some(g) = global_cols {
        g.to_vec()
    } else {
        selection.choose(data, train)?
    };
    let mut spec = spec.clone();
    spec.seed = seed;
    let model = match fit(&spec, &data.subset(train, &cols)) {
        Ok(m) => m,
        Err(Error::SingleClass { kind }) => {
            log::warn!("skipping fold: training rows hold a single class, which {kind} cannot fit");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let held = data.subset(test, &cols);
    let pred = model.predict_batch(&held.x)?;
    Ok(Some(FoldOutcome { pairs: pred.into_iter().zip(held.y).collect(), n_features: cols.len() }))
}

/// Repeated stratified k-fold CV. Repetition `r` uses fold seed
/// `mix64(cv.seed, r)`; the model in fold `f` of repetition `r` is fit with
/// seed `mix64(spec.seed, r * k + f)`.
pub fn repeated_cv(data: &Dataset, spec: &ModelSpec, selection: &SelectionConfig, cv: &CvConfig) -> Result<EvalReport> {
    let start = Instant::now();
    data.validate()?;
    spec.validate()?;
    if cv.reps == 0 {
        return Err(Error::InvalidInput("need at least one repetition".into()));
    }
    let plans = (0..cv.reps)
        .map(|r| {
            let mut p = stratified_kfold(&data.y, cv.k, mix64(cv.seed, r as u64))?;
            p.repetition = r;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let global_cols = match selection.scope {
        SelectionScope::Global if spec.kind != ModelKind::KsZhang => {
            Some(selection.choose(data, &(0..data.len()).collect::<Vec<_>>())?)
        }
        _ => None,
    };
    let cells: Vec<(usize, usize)> = (0..cv.reps).flat_map(|r| (0..cv.k).map(move |f| (r, f))).collect();
    let outcomes = cells
        .par_iter()
        .map(|&(r, f)| {
            let plan = &plans[r];
            let train = plan.train_indices(f);
            let seed = mix64(spec.seed, (r * cv.k + f) as u64);
            run_fold(data, spec, selection, global_cols.as_deref(), &train, &plan.folds[f], seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    let (mut acc_sum, mut f1_sum, mut feat_sum) = (0.0, 0.0, 0usize);
    let mut evaluated = 0;
    for o in outcomes.iter().flatten() {
        let (pred, truth): (Vec<usize>, Vec<usize>) = o.pairs.iter().copied().unzip();
        let fold = metrics(&pred, &truth);
        for t in 0..N_CLASSES {
            for p in 0..N_CLASSES {
                confusion[t][p] += fold.confusion[t][p];
            }
        }
        acc_sum += fold.accuracy;
        f1_sum += fold.macro_f1;
        feat_sum += o.n_features;
        evaluated += 1;
    }
    let denom = evaluated.max(1) as f64;
    Ok(EvalReport {
        method: spec.label(),
        spec: spec.clone(),
        selection: *selection,
        cv: *cv,
        n_features: feat_sum as f64 / denom,
        runtime_ms: start.elapsed().as_millis() as u64,
        metrics: Metrics::from_confusion(confusion),
        fold_mean_accuracy: acc_sum / denom,
        fold_mean_macro_f1: f1_sum / denom,
        folds_evaluated: evaluated,
        folds_skipped: outcomes.len() - evaluated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    /// Every cell, model specs outer, then tau, then threshold.
    pub reports: Vec<EvalReport>,
    pub best: usize,
}

impl GridResult {
    pub fn best_report(&self) -> &EvalReport {
        &self.reports[self.best]
    }
}

/// Evaluate every (spec, tau, threshold) cell. The best cell has the
/// highest pooled accuracy, then macro-F1, then comes first.
pub fn grid_search(
    data: &Dataset,
    specs: &[ModelSpec],
    taus: &[f64],
    thresholds: &[f64],
    target: Target,
    scope: SelectionScope,
    cv: &CvConfig,
) -> Result<GridResult> {
    if specs.is_empty() || taus.is_empty() || thresholds.is_empty() {
        return Err(Error::InvalidInput("grid search needs nonempty grids".into()));
    }
    let mut cells = Vec::new();
    for spec in specs {
        for &tau in taus {
            for &th in thresholds {
                let mut sel = SelectionConfig::new(target, th, tau);
                sel.scope = scope;
                cells.push((spec, sel));
            }
        }
    }
    let reports = cells.par_iter().map(|(spec, sel)| repeated_cv(data, spec, sel, cv)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in reports.iter().enumerate().skip(1) {
        let b = &reports[best].metrics;
        let m = &r.metrics;
        if m.accuracy > b.accuracy || (m.accuracy == b.accuracy && m.macro_f1 > b.macro_f1) {
            best = i;
        }
    }
    Ok(GridResult { reports, best })
}
