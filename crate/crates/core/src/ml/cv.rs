use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Splits `0..labels.len()` into `k` folds. Stratified folds shuffle each
/// class and deal its members round-robin, continuing from the fold where
/// the previous class stopped, so fold sizes differ by at most one and each
/// fold's class counts are within one of the global proportion.
pub fn kfold(labels: &[u8], k: usize, stratified: bool, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k}; cross-validation needs k >= 2")));
    }
    if k > labels.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {} samples", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        let mut by_class = vec![Vec::new(), Vec::new()];
        for (i, &y) in labels.iter().enumerate() {
            by_class[usize::from(y == 1)].push(i);
        }
        let minority = by_class.iter().map(Vec::len).min().unwrap_or(0);
        if k > minority {
            return Err(Error::InvalidArgument(format!(
                "k = {k} exceeds the minority class count {minority}"
            )));
        }
        by_class
    } else {
        vec![(0..labels.len()).collect()]
    };
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Indices outside fold `f`.
pub fn complement(folds: &[Vec<usize>], f: usize) -> Vec<usize> {
    let mut out: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(g, _)| g != f)
        .flat_map(|(_, v)| v.iter().copied())
        .collect();
    out.sort_unstable();
    out
}
