use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Nb,
    Lr,
    Svm,
    Rf,
    Mp,
    KsZhang,
}

impl ModelKind {
    pub const LEARNED: [ModelKind; 5] = [ModelKind::Nb, ModelKind::Lr, ModelKind::Svm, ModelKind::Rf, ModelKind::Mp];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
            ModelKind::Rf => "rf",
            ModelKind::Mp => "mp",
            ModelKind::KsZhang => "ks_zhang",
        }
    }

    /// Hyperparameter names with their defaults. The flag marks
    /// integer-valued parameters that must be at least 1.
    fn defaults(self) -> &'static [(&'static str, f64, bool)] {
        match self {
            ModelKind::Nb => &[("var_floor", 1e-9, false)],
            ModelKind::Lr => &[("lambda", 0.01, false), ("iters", 500.0, true), ("step", 1.0, false)],
            ModelKind::Svm => &[("c", 1.0, false), ("epochs", 50.0, true)],
            ModelKind::Rf => &[("n_trees", 100.0, true), ("min_leaf", 1.0, true)],
            ModelKind::Mp => {
                &[("hidden", 16.0, true), ("lr", 0.1, false), ("epochs", 200.0, true), ("batch", 32.0, true)]
            }
            ModelKind::KsZhang => &[],
        }
    }

    pub fn hyperparameter_names(self) -> Vec<&'static str> {
        self.defaults().iter().map(|d| d.0).collect()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "nb" => ModelKind::Nb,
            "lr" => ModelKind::Lr,
            "svm" => ModelKind::Svm,
            "rf" => ModelKind::Rf,
            "mp" | "mlp" => ModelKind::Mp,
            "ks_zhang" | "ks-zhang" => ModelKind::KsZhang,
            other => return Err(Error::InvalidInput(format!("unknown model kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperparams(pub BTreeMap<String, f64>);

impl Hyperparams {
    /// Value of a validated parameter. Missing names read as 0.
    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub hyper: Hyperparams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        let hyper = kind.defaults().iter().map(|(n, v, _)| (n.to_string(), *v)).collect();
        ModelSpec { kind, hyper: Hyperparams(hyper), seed }
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.hyper.0.insert(name.to_string(), value);
        self.validate()?;
        Ok(self)
    }

    /// Parse `name=value` pairs onto the defaults.
    pub fn with_pairs<S: AsRef<str>>(mut self, pairs: &[S]) -> Result<Self> {
        for p in pairs {
            let p = p.as_ref();
            let (name, value) =
                p.split_once('=').ok_or_else(|| Error::InvalidInput(format!("expected name=value, got {p:?}")))?;
            let value: f64 = value.trim().parse().map_err(|_| Error::InvalidInput(format!("bad value in {p:?}")))?;
            self = self.with(name.trim(), value)?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let defaults = self.kind.defaults();
        for (name, value) in &self.hyper.0 {
            let Some((_, _, integral)) = defaults.iter().find(|d| d.0 == name) else {
                return Err(Error::UnknownHyperparameter { kind: self.kind.to_string(), name: name.clone() });
            };
            if !value.is_finite() || *value < 0.0 || (*integral && (*value < 1.0 || value.fract() != 0.0)) {
                return Err(Error::InvalidInput(format!("{}: invalid value {value} for {name}", self.kind)));
            }
        }
        for (name, _, _) in defaults {
            if !self.hyper.0.contains_key(*name) {
                return Err(Error::InvalidInput(format!("{}: missing hyperparameter {name}", self.kind)));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.hyper.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if parts.is_empty() {
            self.kind.to_string()
        } else {
            format!("{}({})", self.kind, parts.join(","))
        }
    }
}

fn product(kind: ModelKind, seed: u64, axes: &[(&str, &[f64])]) -> Vec<ModelSpec> {
    let mut out = vec![ModelSpec::new(kind, seed)];
    for (name, values) in axes {
        out = out
            .into_iter()
            .flat_map(|s| {
                values.iter().map(move |v| {
                    let mut s = s.clone();
                    s.hyper.0.insert(name.to_string(), *v);
                    s
                })
            })
            .collect();
    }
    out
}

/// Default hyperparameter grid for a model kind.
pub fn default_grid(kind: ModelKind, seed: u64) -> Vec<ModelSpec> {
    match kind {
        ModelKind::Nb => product(kind, seed, &[("var_floor", &[1e-9, 1e-6])]),
        ModelKind::Lr => product(kind, seed, &[("lambda", &[0.0, 0.01, 0.1])]),
        ModelKind::Svm => product(kind, seed, &[("c", &[0.1, 1.0, 10.0])]),
        ModelKind::Rf => product(kind, seed, &[("n_trees", &[100.0, 200.0]), ("min_leaf", &[1.0, 5.0])]),
        ModelKind::Mp => product(kind, seed, &[("hidden", &[8.0, 16.0]), ("lr", &[0.01, 0.1])]),
        ModelKind::KsZhang => vec![ModelSpec::new(kind, seed)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_hyperparameter_rejected() {
        let err = ModelSpec::new(ModelKind::Rf, 0).with("depth", 3.0).unwrap_err();
        assert!(matches!(err, Error::UnknownHyperparameter { .. }));
        assert!(ModelSpec::new(ModelKind::Rf, 0).with("n_trees", 0.0).is_err());
        assert!(ModelSpec::new(ModelKind::Rf, 0).with("n_trees", 2.5).is_err());
        assert!(ModelSpec::new(ModelKind::Lr, 0).with("lambda", f64::NAN).is_err());
    }

    #[test]
    fn pairs_parse() {
        let s = ModelSpec::new(ModelKind::Svm, 0).with_pairs(&["c=10", "epochs = 5"]).unwrap();
        assert_eq!(s.hyper.get("c"), 10.0);
        assert_eq!(s.hyper.get("epochs"), 5.0);
        assert!(ModelSpec::new(ModelKind::Svm, 0).with_pairs(&["c"]).is_err());
    }

    #[test]
    fn grids_are_valid_and_sized() {
        let sizes =
            [(ModelKind::Nb, 2), (ModelKind::Lr, 3), (ModelKind::Svm, 3), (ModelKind::Rf, 4), (ModelKind::Mp, 4)];
        for (k, n) in sizes {
            let g = default_grid(k, 1);
            assert_eq!(g.len(), n);
            g.iter().for_each(|s| s.validate().unwrap());
        }
    }

    #[test]
    fn kind_round_trips_through_text() {
        for k in [ModelKind::Nb, ModelKind::Lr, ModelKind::Svm, ModelKind::Rf, ModelKind::Mp, ModelKind::KsZhang] {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
    }
}
