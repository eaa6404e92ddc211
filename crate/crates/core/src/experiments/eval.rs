//! Fold-wise evaluation: feature vocabularies are refit on every training
//! split, then each requested column group is scored with each learner.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::corpus::{split_mask, Corpus, NewsArticle, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{AnalyzedArticle, ExtractConfig, FeatureSchema, FittedExtractor, GroupExpr, Resources, Side};
use crate::ml::cv::complement;
use crate::ml::{derive_seed, fit, kfold, Confusion, EvalReport, LearnerSpec, TrainingSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EvalMethod {
    Cv { folds: usize, stratified: bool },
    Split { train_fraction: f64, stratified: bool },
}

impl EvalMethod {
    pub fn fold_count(&self) -> usize {
        match self {
            EvalMethod::Cv { folds, .. } => *folds,
            EvalMethod::Split { .. } => 1,
        }
    }
}

/// A labelled column selection.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSpec {
    pub label: String,
    pub expr: GroupExpr,
}

impl RowSpec {
    pub fn parse(text: &str) -> Result<RowSpec> {
        Ok(RowSpec {
            label: text.trim().to_string(),
            expr: GroupExpr::parse(text)?,
        })
    }

    pub fn labelled(label: &str, expr: &str) -> Result<RowSpec> {
        Ok(RowSpec {
            label: label.to_string(),
            expr: GroupExpr::parse(expr)?,
        })
    }
}

pub struct EvalContext<'a> {
    pub resources: &'a Resources,
    pub extract: &'a ExtractConfig,
    pub method: &'a EvalMethod,
    pub learners: &'a [LearnerSpec],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowOutcome {
    pub row: String,
    pub learner: String,
    pub seed: u64,
    pub folds: usize,
    /// Selected column count in the first split.
    pub n_features: usize,
    /// Sides of the article the selected columns read.
    pub sides: BTreeSet<Side>,
    pub report: EvalReport,
}

/// Columns of `expr`, restricted to headline-usable columns when the body
/// is unavailable.
pub fn selected_columns(schema: &FeatureSchema, expr: &GroupExpr, headline_only: bool) -> Vec<usize> {
    let cols = schema.select(expr);
    if headline_only {
        let allowed: BTreeSet<usize> = schema.headline_side_columns().into_iter().collect();
        cols.into_iter().filter(|c| allowed.contains(c)).collect()
    } else {
        cols
    }
}

fn labels_of(articles: &[&AnalyzedArticle]) -> Result<Vec<u8>> {
    articles
        .iter()
        .map(|a| a.label.map(|l| l.as_u8()).ok_or_else(|| Error::Unlabeled(a.id.clone())))
        .collect()
}

/// (train, test) index pairs for one seed.
pub fn partitions(articles: &[&AnalyzedArticle], method: &EvalMethod, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let labels = labels_of(articles)?;
    match method {
        EvalMethod::Cv { folds, stratified } => {
            let f = kfold(&labels, *folds, *stratified, seed)?;
            Ok((0..f.len()).map(|i| (complement(&f, i), f[i].clone())).collect())
        }
        EvalMethod::Split {
            train_fraction,
            stratified,
        } => {
            let stub = Corpus::new(
                "split",
                articles
                    .iter()
                    .map(|a| NewsArticle {
                        label: a.label,
                        ..NewsArticle::new(a.id.clone(), "", "")
                    })
                    .collect(),
            )?;
            let mask = split_mask(
                &stub,
                &SplitSpec {
                    train_fraction: *train_fraction,
                    seed,
                    stratified: *stratified,
                },
            )?;
            let train = (0..mask.len()).filter(|&i| mask[i]).collect::<Vec<_>>();
            let test = (0..mask.len()).filter(|&i| !mask[i]).collect::<Vec<_>>();
            if train.is_empty() || test.is_empty() {
                return Err(Error::InvalidArgument("split leaves an empty training or test set".into()));
            }
            Ok(vec![(train, test)])
        }
    }
}

/// Scores every row with every learner for one seed.
pub fn evaluate_rows(
    ctx: &EvalContext<'_>,
    articles: &[&AnalyzedArticle],
    rows: &[RowSpec],
    seed: u64,
    headline_only: bool,
) -> Result<Vec<RowOutcome>> {
    let labels = labels_of(articles)?;
    let parts = partitions(articles, ctx.method, seed)?;
    let n_learners = ctx.learners.len();
    let mut confusions = vec![vec![Vec::with_capacity(parts.len()); n_learners]; rows.len()];
    let mut n_features = vec![0usize; rows.len()];
    let mut sides = vec![BTreeSet::new(); rows.len()];
    for (f, (train, test)) in parts.iter().enumerate() {
        let train_articles: Vec<&AnalyzedArticle> = train.iter().map(|&i| articles[i]).collect();
        let test_articles: Vec<&AnalyzedArticle> = test.iter().map(|&i| articles[i]).collect();
        let fx = FittedExtractor::fit(&train_articles, ctx.resources, ctx.extract)?;
        let xtr = fx.transform_all(&train_articles)?;
        let xte = fx.transform_all(&test_articles)?;
        let ytr: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
        let yte: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        for (r, row) in rows.iter().enumerate() {
            let cols = selected_columns(fx.schema(), &row.expr, headline_only);
            if f == 0 {
                n_features[r] = cols.len();
                sides[r] = cols.iter().map(|&c| fx.schema().features[c].side).collect();
            }
            let (tr, te) = (xtr.matrix.select_columns(&cols), xte.matrix.select_columns(&cols));
            for (l, spec) in ctx.learners.iter().enumerate() {
                let confusion = if cols.is_empty() {
                    warn!(row = %row.label, "no columns selected; predicting the training majority");
                    let majority = u8::from(2 * ytr.iter().filter(|&&y| y == 1).count() > ytr.len());
                    Confusion::from_predictions(&vec![majority; yte.len()], &yte)?
                } else {
                    let model = fit(spec, &TrainingSet::new(&tr, &ytr)?, derive_seed(seed, f as u64))?;
                    model.evaluate(&TrainingSet::new(&te, &yte)?)?
                };
                debug!(row = %row.label, learner = spec.name(), fold = f, f1 = confusion.metrics().f1);
                confusions[r][l].push(confusion);
            }
        }
    }
    let mut out = Vec::with_capacity(rows.len() * n_learners);
    for (r, row) in rows.iter().enumerate() {
        for (l, spec) in ctx.learners.iter().enumerate() {
            out.push(RowOutcome {
                row: row.label.clone(),
                learner: spec.name().to_string(),
                seed,
                folds: parts.len(),
                n_features: n_features[r],
                sides: sides[r].clone(),
                report: EvalReport::from_folds(spec.name(), seed, std::mem::take(&mut confusions[r][l])),
            });
        }
    }
    Ok(out)
}

/// Forest importance ranking of the columns in `expr`, fit on all articles.
pub fn importance_ranking(
    resources: &Resources,
    extract: &ExtractConfig,
    articles: &[&AnalyzedArticle],
    expr: &GroupExpr,
    learner: &LearnerSpec,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    let labels = labels_of(articles)?;
    let fx = FittedExtractor::fit(articles, resources, extract)?;
    let m = fx.transform_all(articles)?;
    let cols = fx.schema().select(expr);
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let sub = m.select_columns(&cols);
    let model = fit(learner, &TrainingSet::new(&sub.matrix, &labels)?, seed)?
        .with_schema(sub.schema.names().iter().map(|s| s.to_string()).collect(), sub.schema.hash());
    Ok(model.ranked_importance())
}
