use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GiniStats, Tree, TreeParams};
use super::{derive_seed, normalize, TrainingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `ceil(sqrt(n_features))`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            max_depth: None,
            min_leaf: 1,
            mtry: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Majority vote of the trees; an even split falls back to the mean
    /// leaf probability.
    pub fn predict(&self, row: &[f64]) -> u8 {
        let votes = self.trees.iter().filter(|t| t.predict(row) > 0.5).count();
        let n = self.trees.len();
        match (2 * votes).cmp(&n) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => u8::from(self.predict_proba(row) > 0.5),
        }
    }
}

pub fn default_mtry(n_features: usize) -> usize {
    ((n_features as f64).sqrt().ceil() as usize).max(1)
}

/// Fits the forest and returns it with normalized mean-decrease-impurity
/// importances.
pub fn fit_forest(ts: &TrainingSet<'_>, params: &ForestParams, seed: u64) -> Result<(Forest, Vec<f64>)> {
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
    }
    let p = ts.x.cols();
    let mtry = params.mtry.unwrap_or_else(|| default_mtry(p));
    if mtry > p || mtry == 0 {
        return Err(Error::InvalidArgument(format!("mtry {mtry} outside 1..={p}")));
    }
    let n = ts.x.rows();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry: Some(mtry),
    };
    let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(ts.x, samples, || GiniStats::new(ts.y), &tree_params, &mut rng)
        })
        .collect();
    let mut importance = vec![0.0; p];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (acc, v) in importance.iter_mut().zip(normalize(imp)) {
            *acc += v;
        }
        trees.push(tree);
    }
    Ok((Forest { trees }, normalize(importance)))
}
