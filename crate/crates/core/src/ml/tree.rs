//! CART trees: Gini classification trees and the squared-error regression
//! trees used by boosting.
//!
//! Splits send `x <= threshold` left. Thresholds are midpoints between
//! consecutive distinct values. A split is accepted only when it lowers
//! weighted impurity by more than [`MIN_DECREASE`]; among equally good splits
//! the lowest feature index, then the lowest threshold, wins.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;

pub const MIN_DECREASE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_leaf: 1,
            mtry: None,
        }
    }
}

/// Sufficient statistics of a node for one impurity criterion.
pub(crate) trait Stats: Clone {
    fn add(&mut self, i: usize);
    fn sub(&mut self, i: usize);
    fn count(&self) -> usize;
    /// Node impurity times sample count.
    fn weighted_impurity(&self) -> f64;
    fn leaf_value(&self) -> f64;
}

pub(crate) fn gini(n0: f64, n1: f64) -> f64 {
    let n = n0 + n1;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (n0 / n, n1 / n);
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Clone)]
pub(crate) struct GiniStats<'a> {
    y: &'a [u8],
    n: [usize; 2],
}

impl<'a> GiniStats<'a> {
    pub(crate) fn new(y: &'a [u8]) -> Self {
        GiniStats { y, n: [0, 0] }
    }
}

impl Stats for GiniStats<'_> {
    fn add(&mut self, i: usize) {
        self.n[self.y[i] as usize] += 1;
    }
    fn sub(&mut self, i: usize) {
        self.n[self.y[i] as usize] -= 1;
    }
    fn count(&self) -> usize {
        self.n[0] + self.n[1]
    }
    fn weighted_impurity(&self) -> f64 {
        let (a, b) = (self.n[0] as f64, self.n[1] as f64);
        (a + b) * gini(a, b)
    }
    fn leaf_value(&self) -> f64 {
        self.n[1] as f64 / self.count().max(1) as f64
    }
}

/// Squared error of residuals, Newton leaf `Σr / Σh`.
#[derive(Clone)]
pub(crate) struct NewtonStats<'a> {
    r: &'a [f64],
    h: &'a [f64],
    n: usize,
    sum: f64,
    sum_sq: f64,
    sum_h: f64,
}

impl<'a> NewtonStats<'a> {
    pub(crate) fn new(r: &'a [f64], h: &'a [f64]) -> Self {
        NewtonStats {
            r,
            h,
            n: 0,
            sum: 0.0,
            sum_sq: 0.0,
            sum_h: 0.0,
        }
    }
}

impl Stats for NewtonStats<'_> {
    fn add(&mut self, i: usize) {
        self.n += 1;
        self.sum += self.r[i];
        self.sum_sq += self.r[i] * self.r[i];
        self.sum_h += self.h[i];
    }
    fn sub(&mut self, i: usize) {
        self.n -= 1;
        self.sum -= self.r[i];
        self.sum_sq -= self.r[i] * self.r[i];
        self.sum_h -= self.h[i];
    }
    fn count(&self) -> usize {
        self.n
    }
    fn weighted_impurity(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.sum_sq - self.sum * self.sum / self.n as f64).max(0.0)
        }
    }
    fn leaf_value(&self) -> f64 {
        self.sum / self.sum_h.max(1e-12)
    }
}

struct Best {
    decrease: f64,
    feature: usize,
    threshold: f64,
    /// Samples sent left, as a prefix length of the node's sorted order.
    left_len: usize,
    order: Vec<usize>,
}

fn better(dec: f64, f: usize, t: f64, best: &Option<Best>) -> bool {
    match best {
        None => true,
        Some(b) => {
            if dec > b.decrease + MIN_DECREASE {
                true
            } else if dec < b.decrease - MIN_DECREASE {
                false
            } else {
                (f, t) < (b.feature, b.threshold)
            }
        }
    }
}

/// Grows a tree and returns it with per-feature total impurity decrease.
pub(crate) fn grow<S: Stats, R: Rng>(
    x: &Matrix,
    samples: Vec<usize>,
    make: impl Fn() -> S,
    params: &TreeParams,
    rng: &mut R,
) -> (Tree, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut importance = vec![0.0; x.cols()];
    let mut features: Vec<usize> = (0..x.cols()).collect();
    build(x, samples, &make, params, rng, 0, &mut nodes, &mut importance, &mut features);
    (Tree { nodes }, importance)
}

#[allow(clippy::too_many_arguments)]
fn build<S: Stats, R: Rng>(
    x: &Matrix,
    samples: Vec<usize>,
    make: &impl Fn() -> S,
    params: &TreeParams,
    rng: &mut R,
    depth: usize,
    nodes: &mut Vec<Node>,
    importance: &mut [f64],
    features: &mut [usize],
) -> usize {
    let mut parent = make();
    samples.iter().for_each(|&i| parent.add(i));
    let id = nodes.len();
    nodes.push(Node::Leaf {
        value: parent.leaf_value(),
    });
    let min_leaf = params.min_leaf.max(1);
    let parent_imp = parent.weighted_impurity();
    if params.max_depth.is_some_and(|d| depth >= d) || samples.len() < 2 * min_leaf || parent_imp <= MIN_DECREASE {
        return id;
    }

    let Some(best) = find_split(x, &samples, make, &parent, params, rng, features) else {
        return id;
    };
    importance[best.feature] += best.decrease;
    let Best {
        feature,
        threshold,
        left_len,
        mut order,
        ..
    } = best;
    let right_samples = order.split_off(left_len);
    let left = build(x, order, make, params, rng, depth + 1, nodes, importance, features);
    let right = build(x, right_samples, make, params, rng, depth + 1, nodes, importance, features);
    nodes[id] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    id
}

fn find_split<S: Stats, R: Rng>(
    x: &Matrix,
    samples: &[usize],
    make: &impl Fn() -> S,
    parent: &S,
    params: &TreeParams,
    rng: &mut R,
    features: &mut [usize],
) -> Option<Best> {
    let min_leaf = params.min_leaf.max(1);
    let parent_imp = parent.weighted_impurity();
    let p = x.cols();
    let mtry = params.mtry.unwrap_or(p).clamp(1, p.max(1));
    if mtry < p {
        features.shuffle(rng);
    } else {
        features.sort_unstable();
    }
    let mut best: Option<Best> = None;
    let mut visited = 0;
    let mut order: Vec<usize> = samples.to_vec();
    for &f in features.iter() {
        if visited >= mtry {
            break;
        }
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        let first = x.get(order[0], f);
        let last = x.get(order[order.len() - 1], f);
        if first == last {
            // Constant features do not count towards mtry.
            continue;
        }
        visited += 1;
        let mut left = make();
        let mut right = parent.clone();
        for k in 0..order.len() - 1 {
            left.add(order[k]);
            right.sub(order[k]);
            let (v, next) = (x.get(order[k], f), x.get(order[k + 1], f));
            if v == next || left.count() < min_leaf || right.count() < min_leaf {
                continue;
            }
            let dec = parent_imp - left.weighted_impurity() - right.weighted_impurity();
            if dec <= MIN_DECREASE {
                continue;
            }
            let threshold = v + (next - v) / 2.0;
            if better(dec, f, threshold, &best) {
                best = Some(Best {
                    decrease: dec,
                    feature: f,
                    threshold,
                    left_len: k + 1,
                    order: Vec::new(),
                });
            }
        }
        if let Some(b) = best.as_mut() {
            if b.feature == f && b.order.is_empty() {
                b.order = order.clone();
            }
        }
    }
    best
}
