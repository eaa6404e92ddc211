//! Vocabularies, standardized frequencies, the semantic feature slice and
//! feature-vector assembly.

pub mod export;
pub mod extract;
pub mod readability;
pub mod schema;
pub mod semantic;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::TermCounts;

pub use extract::{AnalyzedArticle, ContentView, ExtractConfig, FeatureMatrix, FittedExtractor, Resources};
pub use readability::{readability_indices, Readability};
pub use schema::{semantic_inventory, FeatureSchema, FeatureSpec, GroupExpr, Level, Side};
pub use semantic::semantic_features;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Word,
    PosTag,
    RewriteRule,
    RstRelation,
}

impl TermKind {
    pub fn level(self) -> Level {
        match self {
            TermKind::Word => Level::Lexicon,
            TermKind::PosTag => Level::ShallowSyntax,
            TermKind::RewriteRule => Level::DeepSyntax,
            TermKind::RstRelation => Level::Discourse,
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            TermKind::Word => "bow",
            TermKind::PosTag => "pos",
            TermKind::RewriteRule => "cfg",
            TermKind::RstRelation => "rr",
        }
    }

    pub fn default_min_doc_freq(self) -> u32 {
        match self {
            TermKind::Word | TermKind::RewriteRule => 2,
            TermKind::PosTag | TermKind::RstRelation => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "VocabularyRepr", from = "VocabularyRepr")]
pub struct Vocabulary {
    pub kind: TermKind,
    pub min_doc_freq: u32,
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    kind: TermKind,
    min_doc_freq: u32,
    terms: Vec<String>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_terms(r.kind, r.min_doc_freq, r.terms)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            kind: v.kind,
            min_doc_freq: v.min_doc_freq,
            terms: v.terms,
        }
    }
}

impl Vocabulary {
    pub fn from_terms(kind: TermKind, min_doc_freq: u32, terms: Vec<String>) -> Vocabulary {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            kind,
            min_doc_freq,
            terms,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Map raw term counts onto vocabulary indices, dropping unknown terms.
    pub fn count_vector(&self, counts: &TermCounts) -> CountVector {
        let mut out = CountVector::default();
        for (term, &c) in counts {
            if let Some(i) = self.get(term) {
                out.add(i, c);
            }
        }
        out
    }

    pub fn feature_specs(&self) -> Vec<FeatureSpec> {
        let level = self.kind.level();
        let side = if self.kind == TermKind::RstRelation {
            Side::Body
        } else {
            Side::Content
        };
        self.terms
            .iter()
            .map(|t| FeatureSpec {
                name: format!("{}:{}", self.kind.prefix(), t),
                level,
                group: level.code().to_string(),
                also_in: Vec::new(),
                side,
            })
            .collect()
    }
}

/// Terms present in at least `min_doc_freq` of the documents, ordered by
/// descending document frequency then lexicographically.
pub fn build_vocabulary(docs: &[TermCounts], kind: TermKind, min_doc_freq: u32) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for d in docs {
        for (t, &c) in d {
            if c > 0 {
                *df.entry(t.as_str()).or_default() += 1;
            }
        }
    }
    let mut terms: Vec<(&str, u32)> = df.into_iter().filter(|&(_, n)| n >= min_doc_freq.max(1)).collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    Ok(Vocabulary::from_terms(
        kind,
        min_doc_freq,
        terms.into_iter().map(|(t, _)| t.to_string()).collect(),
    ))
}

/// Sparse term-index counts; stored counts are always positive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountVector {
    entries: BTreeMap<usize, u64>,
}

impl CountVector {
    pub fn add(&mut self, index: usize, count: u64) {
        if count > 0 {
            *self.entries.entry(index).or_default() += count;
        }
    }

    pub fn get(&self, index: usize) -> u64 {
        self.entries.get(&index).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().map(|(&i, &c)| (i, c))
    }
}

impl FromIterator<(usize, u64)> for CountVector {
    fn from_iter<I: IntoIterator<Item = (usize, u64)>>(iter: I) -> Self {
        let mut v = CountVector::default();
        for (i, c) in iter {
            v.add(i, c);
        }
        v
    }
}

/// `x_j / Σ x_j` over a vocabulary of size `q`; all-zero counts give zeros.
/// Indices at or beyond `q` are ignored.
pub fn standardize(counts: &CountVector, q: usize) -> Vec<f64> {
    let mut out = vec![0.0; q];
    let total: u64 = counts.iter().filter(|&(i, _)| i < q).map(|(_, c)| c).sum();
    if total == 0 {
        return out;
    }
    for (i, c) in counts.iter() {
        if i < q {
            out[i] = c as f64 / total as f64;
        }
    }
    out
}

/// Dense feature values aligned to a schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Concatenate per-level slices in schema order. Each slice must have
/// exactly as many values as the schema has columns of that level, and the
/// schema's columns must be grouped by level in the order given.
pub fn assemble(slices: &[(Level, Vec<f64>)], schema: &FeatureSchema) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(schema.len());
    let mut pos = 0;
    for (level, slice) in slices {
        let expected = schema.features[pos..].iter().take_while(|f| f.level == *level).count();
        if expected != slice.len() {
            return Err(Error::Dimension(format!(
                "{level} slice has {} values, schema expects {expected} at column {pos}",
                slice.len()
            )));
        }
        if let Some(bad) = slice.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!(
                "non-finite value in {level} slice at column {}",
                schema.features[pos + bad].name
            )));
        }
        values.extend_from_slice(slice);
        pos += expected;
    }
    if pos != schema.len() {
        return Err(Error::Dimension(format!(
            "slices cover {pos} of {} schema columns",
            schema.len()
        )));
    }
    Ok(FeatureVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(words: &[&str]) -> TermCounts {
        let mut m = TermCounts::new();
        for w in words {
            *m.entry(w.to_string()).or_default() += 1;
        }
        m
    }

    #[test]
    fn vocabulary_threshold_and_order() {
        let docs = [doc(&["a", "b"]), doc(&["a", "c"])];
        let v = build_vocabulary(&docs, TermKind::Word, 2).unwrap();
        assert_eq!(v.terms(), ["a"]);
        let v = build_vocabulary(&docs, TermKind::Word, 1).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert!(matches!(build_vocabulary(&[], TermKind::Word, 1), Err(Error::EmptyTrainingSet)));
    }

    #[test]
    fn standardize_examples() {
        let c: CountVector = [(0, 2), (1, 1)].into_iter().collect();
        assert_eq!(standardize(&c, 2), vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(standardize(&CountVector::default(), 3), vec![0.0; 3]);
        let c: CountVector = [(0, 5)].into_iter().collect();
        assert_eq!(standardize(&c, 3), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_vocabulary_terms_do_not_count() {
        let v = Vocabulary::from_terms(TermKind::Word, 1, vec!["a".into()]);
        let cv = v.count_vector(&doc(&["a", "zzz", "zzz"]));
        assert_eq!(standardize(&cv, v.len()), vec![1.0]);
    }

    #[test]
    fn assemble_checks_dimensions() {
        let mut specs = Vocabulary::from_terms(TermKind::Word, 1, vec!["a".into(), "b".into()]).feature_specs();
        specs.extend(Vocabulary::from_terms(TermKind::RstRelation, 1, vec!["span".into()]).feature_specs());
        let schema = FeatureSchema::new(specs).unwrap();
        let f = assemble(&[(Level::Lexicon, vec![0.5, 0.5]), (Level::Discourse, vec![1.0])], &schema).unwrap();
        assert_eq!(f.values, vec![0.5, 0.5, 1.0]);
        assert!(assemble(&[(Level::Lexicon, vec![1.0]), (Level::Discourse, vec![1.0])], &schema).is_err());
        assert!(assemble(&[(Level::Lexicon, vec![0.5, 0.5])], &schema).is_err());
        let all_rr = schema.select(&GroupExpr::parse("All-RR").unwrap());
        assert_eq!(all_rr, vec![0, 1]);
    }

    proptest! {
        #[test]
        fn standardized_sums_to_one_or_zero(counts in proptest::collection::vec(0u64..20, 1..30)) {
            let cv: CountVector = counts.iter().copied().enumerate().collect();
            let s = standardize(&cv, counts.len());
            let sum: f64 = s.iter().sum();
            if counts.iter().all(|&c| c == 0) {
                prop_assert!(s.iter().all(|&x| x == 0.0));
            } else {
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
            prop_assert!(s.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}
