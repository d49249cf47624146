use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MlError;

/// Assignment of rows to cross-validation folds, keeping groups intact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub groups: Vec<String>,
}

impl FoldPlan {
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

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Greedy grouped k-fold: groups in descending size go to the currently
/// smallest fold. Equal-sized groups are ordered by a seeded shuffle.
pub fn group_kfold<S: AsRef<str>>(groups: &[S], k: usize, seed: u64) -> Result<FoldPlan, MlError> {
    let mut sizes: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for g in groups {
        let g = g.as_ref();
        let e = sizes.entry(g).or_insert_with(|| {
            order.push(g);
            0
        });
        *e += 1;
    }
    if k < 2 || order.len() < k {
        return Err(MlError::TooFewGroups {
            groups: order.len(),
            k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order.sort_by_key(|g| std::cmp::Reverse(sizes[g]));
    let mut fold_of: HashMap<&str, usize> = HashMap::new();
    let mut load = vec![0usize; k];
    for g in order {
        let f = (0..k).min_by_key(|&f| (load[f], f)).expect("k > 0");
        load[f] += sizes[g];
        fold_of.insert(g, f);
    }
    Ok(FoldPlan {
        k,
        assignments: groups.iter().map(|g| fold_of[g.as_ref()]).collect(),
        groups: groups.iter().map(|g| g.as_ref().to_string()).collect(),
    })
}
