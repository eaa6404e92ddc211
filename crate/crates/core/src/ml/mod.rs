//! Supervised learners, metrics and cross-validation.

pub mod boost;
pub mod cv;
pub mod forest;
pub mod logistic;
pub mod matrix;
pub mod metrics;
pub mod tree;

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boost::{fit_boosted, BoostParams, Boosted};
pub use cv::kfold;
pub use forest::{fit_forest, Forest, ForestParams};
pub use logistic::{fit_logistic, objective_and_gradient, Logistic, LogisticParams};
pub use matrix::Matrix;
pub use metrics::{Confusion, Metrics};
pub use tree::{Tree, TreeParams};

/// Feature rows with 0/1 labels (1 = fake).
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a> {
    pub x: &'a Matrix,
    pub y: &'a [u8],
}

impl<'a> TrainingSet<'a> {
    pub fn new(x: &'a Matrix, y: &'a [u8]) -> Result<TrainingSet<'a>> {
        if x.rows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if x.rows() != y.len() {
            return Err(Error::Dimension(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if let Some(v) = y.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidArgument(format!("label {v} outside {{0, 1}}")));
        }
        Ok(TrainingSet { x, y })
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// SplitMix64 mix of a master seed and an index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Scales to sum 1; all-zero input stays zero.
pub(crate) fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.into_iter().map(|x| x / s).collect()
    } else {
        v
    }
}

/// Learner and hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Tree(TreeParams),
    Forest(ForestParams),
    Boosted(BoostParams),
    Logistic(LogisticParams),
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Tree(_) => "tree",
            LearnerSpec::Forest(_) => "forest",
            LearnerSpec::Boosted(_) => "boosted",
            LearnerSpec::Logistic(_) => "logistic",
        }
    }

    /// Default hyperparameters for a learner name.
    pub fn by_name(name: &str) -> Result<LearnerSpec> {
        match name.trim().to_ascii_lowercase().as_str() {
            "tree" | "cart" => Ok(LearnerSpec::Tree(TreeParams::default())),
            "forest" | "rf" | "random_forest" => Ok(LearnerSpec::Forest(ForestParams::default())),
            "boosted" | "gbt" | "xgboost" | "boosting" => Ok(LearnerSpec::Boosted(BoostParams::default())),
            "logistic" | "lr" => Ok(LearnerSpec::Logistic(LogisticParams::default())),
            other => Err(Error::Config(format!("unknown learner `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Fitted {
    Tree(Tree),
    Forest(Forest),
    Boosted(Boosted),
    Logistic(Logistic),
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format_version: u32,
    pub spec: LearnerSpec,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub schema_hash: String,
    /// Impurity decrease share for tree learners, |standardized weight| for
    /// logistic regression.
    pub feature_importance: Vec<f64>,
    pub model: Fitted,
}

pub fn fit(spec: &LearnerSpec, ts: &TrainingSet<'_>, seed: u64) -> Result<ClassifierModel> {
    let (model, feature_importance) = match spec {
        LearnerSpec::Tree(p) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (t, imp) = tree::grow(ts.x, (0..ts.x.rows()).collect(), || tree::GiniStats::new(ts.y), p, &mut rng);
            (Fitted::Tree(t), normalize(imp))
        }
        LearnerSpec::Forest(p) => {
            let (f, imp) = fit_forest(ts, p, seed)?;
            (Fitted::Forest(f), imp)
        }
        LearnerSpec::Boosted(p) => {
            let (b, imp) = fit_boosted(ts, p, seed)?;
            (Fitted::Boosted(b), imp)
        }
        LearnerSpec::Logistic(p) => {
            let (l, imp) = fit_logistic(ts, p);
            (Fitted::Logistic(l), imp)
        }
    };
    Ok(ClassifierModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: *spec,
        seed,
        feature_names: Vec::new(),
        schema_hash: String::new(),
        feature_importance,
        model,
    })
}

impl ClassifierModel {
    pub fn with_schema(mut self, names: Vec<String>, hash: String) -> Self {
        self.feature_names = names;
        self.schema_hash = hash;
        self
    }

    pub fn n_features(&self) -> usize {
        self.feature_importance.len()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        match &self.model {
            Fitted::Tree(t) => t.predict(row),
            Fitted::Forest(f) => f.predict_proba(row),
            Fitted::Boosted(b) => b.predict_proba(row),
            Fitted::Logistic(l) => l.predict_proba(row),
        }
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        match &self.model {
            Fitted::Forest(f) => f.predict(row),
            _ => u8::from(self.predict_proba(row) > 0.5),
        }
    }

    pub fn predict_all(&self, x: &Matrix) -> Result<Vec<u8>> {
        if x.cols() != self.n_features() {
            return Err(Error::SchemaMismatch(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.cols()
            )));
        }
        Ok((0..x.rows()).into_par_iter().map(|i| self.predict(x.row(i))).collect())
    }

    pub fn evaluate(&self, test: &TrainingSet<'_>) -> Result<Confusion> {
        Confusion::from_predictions(&self.predict_all(test.x)?, test.y)
    }

    /// `(name, importance)` sorted by decreasing importance, ties by name.
    pub fn ranked_importance(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = self
            .feature_importance
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let name = self.feature_names.get(i).cloned().unwrap_or_else(|| format!("f{i}"));
                (name, x)
            })
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<ClassifierModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: ClassifierModel = serde_json::from_str(&text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::SchemaMismatch(format!(
                "{}: model format version {} is not supported",
                path.display(),
                m.format_version
            )));
        }
        Ok(m)
    }
}

/// Per-fold and aggregate metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub learner: String,
    pub seed: u64,
    pub folds: Vec<Confusion>,
    pub fold_metrics: Vec<Metrics>,
    /// Mean of the fold metrics.
    pub mean: Metrics,
    pub sd: Metrics,
    pub total: Confusion,
}

impl EvalReport {
    pub fn from_folds(learner: &str, seed: u64, folds: Vec<Confusion>) -> EvalReport {
        let fold_metrics: Vec<Metrics> = folds.iter().map(Confusion::metrics).collect();
        let (mean, sd) = Metrics::mean_sd(&fold_metrics);
        let mut total = Confusion::default();
        folds.iter().for_each(|c| total.add(c));
        EvalReport {
            learner: learner.to_string(),
            seed,
            folds,
            fold_metrics,
            mean,
            sd,
            total,
        }
    }
}

/// k-fold cross-validation on a fixed matrix.
pub fn cross_validate(
    x: &Matrix,
    y: &[u8],
    k: usize,
    stratified: bool,
    spec: &LearnerSpec,
    seed: u64,
) -> Result<EvalReport> {
    TrainingSet::new(x, y)?;
    let folds = kfold(y, k, stratified, seed)?;
    let mut confusions = Vec::with_capacity(k);
    for (f, test_idx) in folds.iter().enumerate() {
        let train_idx = cv::complement(&folds, f);
        let (xtr, xte) = (x.select_rows(&train_idx), x.select_rows(test_idx));
        let ytr: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
        let yte: Vec<u8> = test_idx.iter().map(|&i| y[i]).collect();
        let model = fit(spec, &TrainingSet::new(&xtr, &ytr)?, derive_seed(seed, f as u64))?;
        confusions.push(model.evaluate(&TrainingSet::new(&xte, &yte)?)?);
    }
    Ok(EvalReport::from_folds(spec.name(), seed, confusions))
}
