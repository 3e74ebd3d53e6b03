use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::models::N_CLASSES;
use crate::seed::{mix64, rng};
use crate::{Error, Result};

/// A partition of row indices into `k` test folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub repetition: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Every row outside test fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.folds.iter().enumerate().filter(|(i, _)| *i != f).flat_map(|(_, rows)| rows.iter().copied()).collect();
        out.sort_unstable();
        out
    }
}

/// Shuffle each class with its own derived seed, then deal rows to folds
/// round-robin. The dealing pointer carries over from one class to the
/// next, which keeps total fold sizes within one of each other.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {k}")));
    }
    if k > y.len() {
        return Err(Error::InvalidInput(format!("{k} folds for {} rows", y.len())));
    }
    let mut folds = vec![Vec::new(); k];
    let mut pointer = 0;
    for c in 0..N_CLASSES {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        members.shuffle(&mut rng(mix64(seed, c as u64)));
        for i in members {
            folds[pointer % k].push(i);
            pointer += 1;
        }
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= N_CLASSES) {
        return Err(Error::InvalidInput(format!("class label {bad} outside 0..3")));
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldPlan { folds, repetition: 0, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_classes_one_per_fold() {
        let y: Vec<usize> = (0..30).map(|i| i / 10).collect();
        let plan = stratified_kfold(&y, 10, 3).unwrap();
        for f in &plan.folds {
            let mut cls: Vec<usize> = f.iter().map(|&i| y[i]).collect();
            cls.sort();
            assert_eq!(cls, vec![0, 1, 2]);
        }
        assert_eq!(plan, stratified_kfold(&y, 10, 3).unwrap());
    }

    #[test]
    fn seven_rows_three_folds() {
        let plan = stratified_kfold(&[1; 7], 3, 0).unwrap();
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
    }

    #[test]
    fn too_many_folds() {
        assert!(stratified_kfold(&[0, 1], 3, 0).is_err());
        assert!(stratified_kfold(&[0, 1], 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn plans_partition_rows(y in proptest::collection::vec(0usize..3, 10..80), k in 2usize..10, seed in any::<u64>()) {
            let plan = stratified_kfold(&y, k, seed).unwrap();
            let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            for c in 0..3 {
                let counts: Vec<usize> = plan.folds.iter().map(|f| f.iter().filter(|&&i| y[i] == c).count()).collect();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
            for f in 0..k {
                let train = plan.train_indices(f);
                prop_assert_eq!(train.len() + plan.folds[f].len(), y.len());
                prop_assert!(plan.folds[f].iter().all(|i| train.binary_search(i).is_err()));
            }
        }
    }
}
