//! Classifiers for the three-class knowledge prediction tasks.
//!
//! Every model implements the same contract: [`fit`] on a labeled
//! [`Dataset`] returns an immutable [`TrainedModel`] whose predictions are a
//! deterministic function of the spec (including its seed) and the training
//! rows. Class labels are `0 = Low`, `1 = Moderate`, `2 = High`; argmax ties
//! resolve to the smaller class index.

mod baseline;
mod dataset;
mod forest;
mod logistic;
mod mlp;
mod naive_bayes;
mod spec;
mod standardize;
mod svm;

use serde::{Deserialize, Serialize};

pub use baseline::{ks_zhang_classify, ks_zhang_score, KsZhang, KS_ZHANG_QLEN, KS_ZHANG_RELMEAN};
pub use dataset::Dataset;
pub use forest::{DecisionTree, RandomForest};
pub use logistic::{LogisticRegression, TrainingTrace};
pub use mlp::Mlp;
pub use naive_bayes::GaussianNb;
pub use spec::{default_grid, Hyperparams, ModelKind, ModelSpec};
pub use standardize::Standardizer;
pub use svm::LinearSvm;

use crate::{Error, Result};

pub const N_CLASSES: usize = 3;

/// Model document format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(GaussianNb),
    Logistic(LogisticRegression),
    Svm(LinearSvm),
    Forest(RandomForest),
    Perceptron(Mlp),
    KsZhang(KsZhang),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    /// Per-column statistics from the training rows, for the kinds that
    /// standardize their inputs.
    pub standardizer: Option<Standardizer>,
    pub params: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model: TrainedModel,
}

fn class_count(y: &[usize]) -> usize {
    let mut seen = [false; N_CLASSES];
    for &c in y {
        seen[c] = true;
    }
    seen.iter().filter(|s| **s).count()
}

/// Train a model of `spec.kind` on `train`.
pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    train.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidInput("cannot fit on an empty dataset".into()));
    }
    let needs_two = matches!(spec.kind, ModelKind::Lr | ModelKind::Svm | ModelKind::Mp);
    if needs_two && class_count(&train.y) < 2 {
        return Err(Error::SingleClass { kind: spec.kind.to_string() });
    }
    let standardizer =
        matches!(spec.kind, ModelKind::Lr | ModelKind::Svm | ModelKind::Mp).then(|| Standardizer::fit(&train.x));
    let x: Vec<Vec<f64>> = match &standardizer {
        Some(s) => train.x.iter().map(|r| s.transform(r)).collect(),
        None => train.x.clone(),
    };
    let h = &spec.hyper;
    let params = match spec.kind {
        ModelKind::Nb => ModelParams::NaiveBayes(GaussianNb::fit(&x, &train.y, h.get("var_floor"))),
        ModelKind::Lr => ModelParams::Logistic(
            LogisticRegression::fit(&x, &train.y, h.get("lambda"), h.get("iters") as usize, h.get("step")).0,
        ),
        ModelKind::Svm => {
            ModelParams::Svm(LinearSvm::fit(&x, &train.y, h.get("c"), h.get("epochs") as usize, spec.seed))
        }
        ModelKind::Rf => ModelParams::Forest(RandomForest::fit(
            &x,
            &train.y,
            h.get("n_trees") as usize,
            h.get("min_leaf") as usize,
            spec.seed,
        )),
        ModelKind::Mp => ModelParams::Perceptron(Mlp::fit(
            &x,
            &train.y,
            h.get("hidden") as usize,
            h.get("lr"),
            h.get("epochs") as usize,
            h.get("batch") as usize,
            spec.seed,
        )),
        ModelKind::KsZhang => ModelParams::KsZhang(KsZhang::fit(train)?),
    };
    Ok(TrainedModel { spec: spec.clone(), n_features: train.n_features(), standardizer, params })
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::WidthMismatch { expected: self.n_features, actual: x.len() });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite feature value at column {i}")));
        }
        let scaled;
        let x = match &self.standardizer {
            Some(s) => {
                scaled = s.transform(x);
                &scaled[..]
            }
            None => x,
        };
        Ok(self.predict_prepared(x))
    }

    fn predict_prepared(&self, x: &[f64]) -> usize {
        match &self.params {
            ModelParams::NaiveBayes(m) => m.predict(x),
            ModelParams::Logistic(m) => m.predict(x),
            ModelParams::Svm(m) => m.predict(x),
            ModelParams::Forest(m) => m.predict(x),
            ModelParams::Perceptron(m) => m.predict(x),
            ModelParams::KsZhang(m) => m.predict(x),
        }
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn forest(&self) -> Option<&RandomForest> {
        match &self.params {
            ModelParams::Forest(f) => Some(f),
            _ => None,
        }
    }

    /// Versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelDocument { format_version: FORMAT_VERSION, model: self.clone() })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::InvalidInput("model document lacks format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::Version { found: version as u32, expected: FORMAT_VERSION });
        }
        let doc: ModelDocument = serde_json::from_value(value)?;
        doc.model.spec.validate()?;
        Ok(doc.model)
    }
}
