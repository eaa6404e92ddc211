//! Per-article analysis and the train-fitted extractor that turns analyzed
//! articles into feature vectors.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::corpus::{article_seed, Corpus, Label, NewsArticle};
use crate::discourse::{relation_counts, RelationScheme, RstNode};
use crate::embeddings::{EmbeddingModel, UnigramModel};
use crate::error::{Error, Result};
use crate::lexicons::LexiconPack;
use crate::ml::Matrix;
use crate::textproc::{split_paragraphs, tokenize, TokenizedDoc};
use crate::treebank::{pos_counts, rewrite_rules, ConstituencyTree, ParseSidecar, TermCounts};

use super::schema::{inventory, FeatureSchema, Level};
use super::semantic::{semantic_features, similarity, word_sentences, SemanticInput};
use super::{build_vocabulary, standardize, FeatureVector, TermKind, Vocabulary};

/// Lexicons, embeddings and parser sidecars shared by all articles.
#[derive(Debug, Clone)]
pub struct Resources {
    pub pack: LexiconPack,
    pub embeddings: Option<EmbeddingModel>,
    pub trees: Option<ParseSidecar>,
    pub rst: Option<HashMap<String, RstNode>>,
    pub rst_scheme: RelationScheme,
}

impl Resources {
    pub fn new(pack: LexiconPack) -> Resources {
        Resources {
            pack,
            embeddings: None,
            trees: None,
            rst: None,
            rst_scheme: RelationScheme::default(),
        }
    }
}

/// How much of each article the pipeline sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ContentView {
    #[default]
    Full,
    /// Headline plus `n` randomly chosen body paragraphs per article.
    Paragraphs { n: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinDocFreq {
    pub word: u32,
    pub pos_tag: u32,
    pub rewrite_rule: u32,
    pub rst_relation: u32,
}

impl Default for MinDocFreq {
    fn default() -> Self {
        MinDocFreq {
            word: TermKind::Word.default_min_doc_freq(),
            pos_tag: TermKind::PosTag.default_min_doc_freq(),
            rewrite_rule: TermKind::RewriteRule.default_min_doc_freq(),
            rst_relation: TermKind::RstRelation.default_min_doc_freq(),
        }
    }
}

impl MinDocFreq {
    fn get(&self, kind: TermKind) -> u32 {
        match kind {
            TermKind::Word => self.word,
            TermKind::PosTag => self.pos_tag,
            TermKind::RewriteRule => self.rewrite_rule,
            TermKind::RstRelation => self.rst_relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub levels: BTreeSet<Level>,
    #[serde(default)]
    pub min_doc_freq: MinDocFreq,
    /// Fit and remove the SIF common component on the training sentences.
    #[serde(default = "default_true")]
    pub fit_common_component: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            levels: Level::ALL.into_iter().collect(),
            min_doc_freq: MinDocFreq::default(),
            fit_common_component: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArticleFlags {
    pub empty_headline: bool,
    pub empty_body: bool,
    pub truncated: bool,
    pub missing_trees: bool,
    pub missing_rst: bool,
}

/// Everything about one article that does not depend on the training split.
#[derive(Debug, Clone)]
pub struct AnalyzedArticle {
    pub id: String,
    pub label: Option<Label>,
    pub headline: TokenizedDoc,
    pub body: TokenizedDoc,
    pub words: TermCounts,
    pub pos: TermCounts,
    pub rules: TermCounts,
    pub relations: TermCounts,
    /// Semantic slice with the similarity columns still zero.
    pub semantic: Vec<f64>,
    pub flags: ArticleFlags,
}

fn similarity_offset() -> usize {
    inventory()
        .iter()
        .position(|f| f.name == "cba.similarity.word2vec")
        .expect("inventory has similarity columns")
}

impl AnalyzedArticle {
    pub fn analyze(article: &NewsArticle, res: &Resources, view: ContentView) -> AnalyzedArticle {
        let paragraphs = split_paragraphs(&article.body);
        let kept: Option<Vec<usize>> = match view {
            ContentView::Full => None,
            ContentView::Paragraphs { n, seed } => {
                crate::corpus::truncated_paragraph_indices(article, n, article_seed(seed, &article.id))
            }
        };
        let body_text = match &kept {
            None => paragraphs.join("\n\n"),
            Some(idx) => idx.iter().map(|&i| paragraphs[i]).collect::<Vec<_>>().join("\n\n"),
        };
        let headline = tokenize(&article.headline);
        let body = tokenize(&body_text);
        let mut flags = ArticleFlags {
            empty_headline: headline.word_count() == 0,
            empty_body: body.word_count() == 0,
            truncated: kept.is_some(),
            ..ArticleFlags::default()
        };

        let mut words = TermCounts::new();
        for w in headline.lowercase_words().into_iter().chain(body.lowercase_words()) {
            *words.entry(w.to_string()).or_default() += 1;
        }

        let (mut pos, mut rules, mut body_tags) = (TermCounts::new(), TermCounts::new(), Vec::new());
        if let Some(sidecar) = &res.trees {
            if sidecar.contains(&article.id) {
                let keep = |p: Option<usize>| match (&kept, p) {
                    (None, _) | (_, Some(0)) => true,
                    (Some(idx), Some(p)) => idx.contains(&(p - 1)),
                    // Sentence position unknown: only usable when nothing was dropped.
                    (Some(_), None) => false,
                };
                let selected: Vec<&ConstituencyTree> = sidecar
                    .sentences(&article.id)
                    .iter()
                    .filter(|s| keep(s.locator.paragraph))
                    .map(|s| &s.tree)
                    .collect();
                let owned: Vec<ConstituencyTree> = selected.iter().map(|t| (*t).clone()).collect();
                pos = pos_counts(&owned);
                rules = rewrite_rules(&owned);
                for s in sidecar.sentences(&article.id) {
                    if !s.locator.is_headline() && keep(s.locator.paragraph) {
                        body_tags.extend(s.tree.leaves().into_iter().map(|(t, w)| (t.to_string(), w.to_string())));
                    }
                }
            } else {
                warn!(id = %article.id, "no parse trees; syntax features are zero");
                flags.missing_trees = true;
            }
        } else {
            flags.missing_trees = true;
        }

        let mut relations = TermCounts::new();
        // The discourse tree covers the whole body; a truncated body has none.
        if kept.is_none() {
            match res.rst.as_ref().and_then(|m| m.get(&article.id)) {
                Some(tree) => relations = relation_counts(tree, res.rst_scheme),
                None => {
                    if res.rst.is_some() {
                        warn!(id = %article.id, "no discourse tree; relation features are zero");
                    }
                    flags.missing_rst = true;
                }
            }
        } else {
            flags.missing_rst = true;
        }

        let semantic = semantic_features(
            &SemanticInput {
                headline: &headline,
                body: &body,
                body_tags: &body_tags,
            },
            &res.pack,
            None,
        );
        AnalyzedArticle {
            id: article.id.clone(),
            label: article.label,
            headline,
            body,
            words,
            pos,
            rules,
            relations,
            semantic,
            flags,
        }
    }

    fn terms(&self, kind: TermKind) -> &TermCounts {
        match kind {
            TermKind::Word => &self.words,
            TermKind::PosTag => &self.pos,
            TermKind::RewriteRule => &self.rules,
            TermKind::RstRelation => &self.relations,
        }
    }
}

/// Analyze every article of a corpus in parallel, keeping corpus order.
pub fn analyze_corpus(corpus: &Corpus, res: &Resources, view: ContentView) -> Vec<AnalyzedArticle> {
    corpus
        .articles
        .par_iter()
        .map(|a| AnalyzedArticle::analyze(a, res, view))
        .collect()
}

/// Vocabularies and embedding state fit on a training split.
#[derive(Debug, Clone)]
pub struct FittedExtractor {
    pub config: ExtractConfig,
    pub vocabularies: Vec<Vocabulary>,
    pub embeddings: Option<EmbeddingModel>,
    schema: FeatureSchema,
    semantic_columns: Vec<usize>,
}

fn level_kind(level: Level) -> Option<TermKind> {
    match level {
        Level::Lexicon => Some(TermKind::Word),
        Level::ShallowSyntax => Some(TermKind::PosTag),
        Level::DeepSyntax => Some(TermKind::RewriteRule),
        Level::Discourse => Some(TermKind::RstRelation),
        Level::SemanticDia | Level::SemanticCba => None,
    }
}

impl FittedExtractor {
    pub fn fit(train: &[&AnalyzedArticle], res: &Resources, config: &ExtractConfig) -> Result<FittedExtractor> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mut vocabularies = Vec::new();
        let mut specs = Vec::new();
        let mut semantic_columns = Vec::new();
        let inventory = inventory();
        for level in Level::ALL {
            if !config.levels.contains(&level) {
                continue;
            }
            match level_kind(level) {
                Some(kind) => {
                    let docs: Vec<TermCounts> = train.iter().map(|a| a.terms(kind).clone()).collect();
                    let v = build_vocabulary(&docs, kind, config.min_doc_freq.get(kind))?;
                    specs.extend(v.feature_specs());
                    vocabularies.push(v);
                }
                None => {
                    for (i, f) in inventory.iter().enumerate() {
                        if f.level == level {
                            specs.push(f.clone());
                            semantic_columns.push(i);
                        }
                    }
                }
            }
        }

        let wants_similarity = config.levels.contains(&Level::SemanticCba);
        let embeddings = match (&res.embeddings, wants_similarity) {
            (Some(base), true) => {
                let mut model = base.clone();
                if model.unigram.is_empty() {
                    model.unigram = UnigramModel::estimate(
                        train
                            .iter()
                            .flat_map(|a| a.headline.lowercase_words().into_iter().chain(a.body.lowercase_words())),
                    );
                }
                if config.fit_common_component {
                    let sentences: Vec<Vec<&str>> = train
                        .iter()
                        .flat_map(|a| word_sentences(&a.headline).into_iter().chain(word_sentences(&a.body)))
                        .collect();
                    model.fit_common_component(&sentences);
                }
                Some(model)
            }
            (None, true) => {
                warn!("no embedding model; similarity features are zero");
                None
            }
            _ => None,
        };

        Ok(FittedExtractor {
            config: config.clone(),
            vocabularies,
            embeddings,
            schema: FeatureSchema::new(specs)?,
            semantic_columns,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn transform(&self, a: &AnalyzedArticle) -> FeatureVector {
        let mut values = Vec::with_capacity(self.schema.len());
        let mut vocab = self.vocabularies.iter();
        let mut semantic: Option<Vec<f64>> = None;
        for level in Level::ALL {
            if !self.config.levels.contains(&level) {
                continue;
            }
            match level_kind(level) {
                Some(kind) => {
                    let v = vocab.next().expect("one vocabulary per term level");
                    debug_assert_eq!(v.kind, kind);
                    values.extend(standardize(&v.count_vector(a.terms(kind)), v.len()));
                }
                None => {
                    let s = semantic.get_or_insert_with(|| {
                        let mut s = a.semantic.clone();
                        let sim = similarity(&a.headline, &a.body, self.embeddings.as_ref());
                        let at = similarity_offset();
                        s[at..at + 2].copy_from_slice(&sim);
                        s
                    });
                    let inv = inventory();
                    values.extend(
                        self.semantic_columns
                            .iter()
                            .filter(|&&i| inv[i].level == level)
                            .map(|&i| s[i]),
                    );
                }
            }
        }
        debug_assert_eq!(values.len(), self.schema.len());
        FeatureVector { values }
    }

    pub fn transform_all(&self, articles: &[&AnalyzedArticle]) -> Result<FeatureMatrix> {
        let rows: Vec<Vec<f64>> = articles.par_iter().map(|a| self.transform(a).values).collect();
        let matrix = if rows.is_empty() {
            Matrix::zeros(0, self.schema.len())
        } else {
            Matrix::from_rows(&rows)?
        };
        Ok(FeatureMatrix {
            schema: self.schema.clone(),
            ids: articles.iter().map(|a| a.id.clone()).collect(),
            labels: articles.iter().map(|a| a.label).collect(),
            matrix,
        })
    }
}

/// Feature rows for a set of articles, aligned to a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: FeatureSchema,
    pub ids: Vec<String>,
    pub labels: Vec<Option<Label>>,
    pub matrix: Matrix,
}

impl FeatureMatrix {
    /// Labels as 0/1; errors if any row is unlabeled.
    pub fn label_vector(&self) -> Result<Vec<u8>> {
        self.labels
            .iter()
            .zip(&self.ids)
            .map(|(l, id)| l.map(Label::as_u8).ok_or_else(|| Error::Unlabeled(id.clone())))
            .collect()
    }

    pub fn select_columns(&self, columns: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            schema: self.schema.subset(columns),
            ids: self.ids.clone(),
            labels: self.labels.clone(),
            matrix: self.matrix.select_columns(columns),
        }
    }
}
