use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::knowledge::{bin_class, standardize};
use crate::stats::{mean, sample_sd};
use crate::{Error, Result};

/// Feature columns the fixed linear knowledge-state score reads.
pub const KS_ZHANG_QLEN: &str = "q_term_avg";
pub const KS_ZHANG_RELMEAN: &str = "SERP_click_rank_avg";

/// Fixed-coefficient knowledge-state score.
pub fn ks_zhang_score(saved: f64, q_len: f64, rel_mean: f64) -> f64 {
    -1.466 + 0.039 * saved + 0.147 * q_len + 0.130 * rel_mean
}

/// Bin scores into classes after standardizing them across the given set.
pub fn ks_zhang_classify(scores: &[f64]) -> Result<Vec<usize>> {
    Ok(standardize(scores)?.into_iter().map(|z| bin_class(z).index()).collect())
}

/// The fixed score used as a classifier: the binning statistics come from
/// the training rows. No saved-page signal is logged, so `saved` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsZhang {
    pub q_len_col: usize,
    pub rel_mean_col: usize,
    pub mean: f64,
    pub sd: f64,
}

impl KsZhang {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let cols = train.column_indices(&[KS_ZHANG_QLEN.to_string(), KS_ZHANG_RELMEAN.to_string()])?;
        let scores: Vec<f64> = train.x.iter().map(|r| ks_zhang_score(0.0, r[cols[0]], r[cols[1]])).collect();
        let sd = sample_sd(&scores);
        if sd <= 0.0 {
            return Err(Error::Degenerate("baseline scores have zero spread on the training rows".into()));
        }
        Ok(KsZhang { q_len_col: cols[0], rel_mean_col: cols[1], mean: mean(&scores), sd })
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let s = ks_zhang_score(0.0, x[self.q_len_col], x[self.rel_mean_col]);
        bin_class((s - self.mean) / self.sd).index()
    }
}
