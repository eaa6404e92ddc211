//! Gradient boosting with logistic loss: regression trees fit to the
//! residuals `y - p`, Newton leaf values `Σr / Σp(1-p)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, NewtonStats, Tree, TreeParams};
use super::{normalize, sigmoid, TrainingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Row fraction drawn without replacement per round; 1 uses every row.
    pub subsample: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 1,
            subsample: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Boosted {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

pub fn fit_boosted(ts: &TrainingSet<'_>, params: &BoostParams, seed: u64) -> Result<(Boosted, Vec<f64>)> {
    if params.n_rounds == 0 {
        return Err(Error::InvalidArgument("n_rounds must be at least 1".into()));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::InvalidArgument(format!("subsample {} outside (0, 1]", params.subsample)));
    }
    let n = ts.x.rows();
    let rate = ts.y.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let rate = rate.clamp(1e-6, 1.0 - 1e-6);
    let base_score = (rate / (1.0 - rate)).ln();
    let mut score = vec![base_score; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree_params = TreeParams {
        max_depth: Some(params.max_depth),
        min_leaf: params.min_leaf,
        mtry: None,
    };
    let mut trees = Vec::with_capacity(params.n_rounds);
    let mut importance = vec![0.0; ts.x.cols()];
    for _ in 0..params.n_rounds {
        let p: Vec<f64> = score.iter().map(|&s| sigmoid(s)).collect();
        let r: Vec<f64> = ts.y.iter().zip(&p).map(|(&y, &p)| y as f64 - p).collect();
        let h: Vec<f64> = p.iter().map(|&p| p * (1.0 - p)).collect();
        let samples: Vec<usize> = if params.subsample < 1.0 {
            let k = ((params.subsample * n as f64).round() as usize).max(1);
            let mut s = rand::seq::index::sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        } else {
            (0..n).collect()
        };
        let (tree, imp) = grow(ts.x, samples, || NewtonStats::new(&r, &h), &tree_params, &mut rng);
        importance.iter_mut().zip(imp).for_each(|(a, v)| *a += v);
        for (i, s) in score.iter_mut().enumerate() {
            *s += params.learning_rate * tree.predict(ts.x.row(i));
        }
        trees.push(tree);
    }
    Ok((
        Boosted {
            base_score,
            learning_rate: params.learning_rate,
            trees,
        },
        normalize(importance),
    ))
}
