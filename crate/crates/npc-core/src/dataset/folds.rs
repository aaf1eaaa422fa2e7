//! Stratified k-fold partitioning with seeded, reproducible shuffling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassLabel, DataError, Dataset};

/// Assignment of every sample to one of `k` folds.
///
/// Within each class, indices are shuffled by a seeded permutation and
/// dealt round-robin; the deal counter persists across classes so every
/// fold is populated whenever `n >= k`. Per-class fold counts therefore
/// differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    /// Builds a stratified plan. Deterministic for fixed
    /// (dataset, k, seed).
    pub fn stratified(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
        let n = dataset.len();
        if k < 2 || k > n {
            return Err(DataError::InvalidFoldCount { k, n });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignments = vec![0usize; n];
        let mut next_fold = 0usize;
        for class in [ClassLabel::Majority, ClassLabel::Minority] {
            let mut indices: Vec<usize> = (0..n).filter(|&i| dataset.labels[i] == class).collect();
            indices.shuffle(&mut rng);
            for idx in indices {
                assignments[idx] = next_fold;
                next_fold = (next_fold + 1) % k;
            }
        }
        Ok(FoldPlan { k, assignments })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    /// Materializes (train, test) datasets for one fold. Fails if the
    /// training portion ends up single-class; a single-class *test*
    /// portion is allowed (its metrics are reported as undefined).
    pub fn split(&self, dataset: &Dataset, fold: usize) -> Result<(Dataset, Dataset), DataError> {
        let train = dataset.subset(&self.train_indices(fold));
        let test = dataset.subset(&self.test_indices(fold));
        if !train.has_both_classes() {
            return Err(DataError::SingleClassTrainingFold { fold });
        }
        Ok((train, test))
    }
}
