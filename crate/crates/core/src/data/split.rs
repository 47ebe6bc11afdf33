//! Seeded stratified k-fold splits.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Fold id per example. Each class is shuffled separately and dealt
/// round-robin, positives first, so every fold gets `⌊n_c/K⌋` or `⌈n_c/K⌉`
/// members of class `c`.
pub fn stratified_assignment(labels: &[Label], folds: usize, trial_seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Argument(format!("need at least 2 folds, got {folds}")));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_positive()).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i].is_positive()).collect();
    if pos.len() < folds || neg.len() < folds {
        return Err(Error::DegenerateData(format!(
            "{folds} folds need {folds} examples per class, have {} positive and {} negative",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = seed::rng(trial_seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut assignment = vec![0; labels.len()];
    for (slot, &i) in pos.iter().chain(&neg).enumerate() {
        assignment[i] = slot % folds;
    }
    Ok(assignment)
}

pub fn stratified_folds(labels: &[Label], folds: usize, trial_seed: u64) -> Result<Vec<Fold>> {
    let assignment = stratified_assignment(labels, folds, trial_seed)?;
    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}

pub fn split_and_shuffle(data: &Dataset, folds: usize, trial_seed: u64) -> Result<Vec<Fold>> {
    stratified_folds(data.labels(), folds, trial_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n_pos: usize, n_neg: usize) -> Vec<Label> {
        let mut l = vec![Label::Positive; n_pos];
        l.extend(vec![Label::Negative; n_neg]);
        l
    }

    #[test]
    fn five_by_five() {
        let l = labels(5, 5);
        let folds = stratified_folds(&l, 5, 1).unwrap();
        for f in &folds {
            assert_eq!(f.test.len(), 2);
            assert_eq!(f.test.iter().filter(|&&i| l[i].is_positive()).count(), 1);
        }
        assert_eq!(folds, stratified_folds(&l, 5, 1).unwrap());
        assert_ne!(folds, stratified_folds(&l, 5, 2).unwrap());
    }

    #[test]
    fn too_few_members() {
        assert!(matches!(stratified_folds(&labels(4, 20), 5, 0), Err(Error::DegenerateData(_))));
        assert!(stratified_folds(&labels(4, 20), 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(n_pos in 2usize..30, n_neg in 2usize..60, k in 2usize..6, s in any::<u64>()) {
            prop_assume!(n_pos >= k && n_neg >= k);
            let l = labels(n_pos, n_neg);
            let folds = stratified_folds(&l, k, s).unwrap();
            let mut seen = vec![0; l.len()];
            for f in &folds {
                for &i in &f.test {
                    seen[i] += 1;
                }
                prop_assert_eq!(f.train.len() + f.test.len(), l.len());
                prop_assert!(f.train.iter().all(|i| !f.test.contains(i)));
                let p = f.test.iter().filter(|&&i| l[i].is_positive()).count();
                prop_assert!(p == n_pos / k || p == n_pos.div_ceil(k));
                let q = f.test.len() - p;
                prop_assert!(q == n_neg / k || q == n_neg.div_ceil(k));
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
