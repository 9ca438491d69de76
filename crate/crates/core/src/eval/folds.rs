use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment of every sample to one of `k` held-out folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// Same plan with samples reordered by `perm` (sample `i` of the result
    /// is sample `perm[i]` of `self`).
    pub fn permuted(&self, perm: &[usize]) -> FoldPlan {
        FoldPlan {
            assignment: perm.iter().map(|&i| self.assignment[i]).collect(),
            ..self.clone()
        }
    }
}

/// Seeded shuffle then round-robin assignment. When stratified, each class
/// is shuffled separately and the round-robin counter carries over from one
/// class to the next, so both per-class and overall fold sizes differ by at
/// most one.
pub fn make_folds(labels: &[usize], k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(Error::param(format!("fold count {k} outside 2..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut g = vec![Vec::new(); classes];
        for (i, &l) in labels.iter().enumerate() {
            g[l].push(i);
        }
        g
    } else {
        vec![(0..n).collect()]
    };
    let mut assignment = vec![0; n];
    let mut next = 0;
    for mut group in groups {
        group.shuffle(&mut rng);
        for i in group {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        stratified,
        assignment,
    })
}
