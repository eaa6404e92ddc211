//! Pretrained word vectors, word-averaged and smooth-inverse-frequency (SIF)
//! sentence embeddings, and cosine similarity.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIF_A: f64 = 1e-3;

/// Unigram probabilities with add-one smoothing:
/// `p(w) = (count(w) + 1) / (total + types + 1)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct UnigramModel {
    counts: HashMap<String, u64>,
    total: u64,
}

impl UnigramModel {
    pub fn from_counts(counts: HashMap<String, u64>) -> UnigramModel {
        let total = counts.values().sum();
        UnigramModel { counts, total }
    }

    /// Maximum-likelihood counts over an iterator of lowercase words.
    pub fn estimate<'a>(words: impl IntoIterator<Item = &'a str>) -> UnigramModel {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for w in words {
            *counts.entry(w.to_string()).or_default() += 1;
        }
        Self::from_counts(counts)
    }

    /// Reads `token<TAB>count` lines.
    pub fn load(path: &Path) -> Result<UnigramModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Sidecar {
                file: path.display().to_string(),
                line: i + 1,
                message,
            };
            let (w, c) = line.split_once('\t').ok_or_else(|| err("expected `token<TAB>count`".into()))?;
            let c: u64 = c.trim().parse().map_err(|e| err(format!("bad count `{c}`: {e}")))?;
            *counts.entry(w.to_lowercase()).or_default() += c;
        }
        Ok(Self::from_counts(counts))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn probability(&self, word: &str) -> f64 {
        let c = self.counts.get(word).copied().unwrap_or(0);
        (c as f64 + 1.0) / (self.total as f64 + self.counts.len() as f64 + 1.0)
    }

    pub fn to_tsv(&self) -> String {
        let mut v: Vec<(&String, &u64)> = self.counts.iter().collect();
        v.sort();
        v.into_iter().map(|(w, c)| format!("{w}\t{c}\n")).collect()
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    dim: usize,
    vectors: Arc<HashMap<String, Vec<f64>>>,
    pub unigram: UnigramModel,
    pub sif_a: f64,
    common_component: Option<Vec<f64>>,
}

impl EmbeddingModel {
    pub fn new(dim: usize, vectors: HashMap<String, Vec<f64>>) -> Result<EmbeddingModel> {
        if let Some((w, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::Dimension(format!("vector for `{w}` has length {}, expected {dim}", v.len())));
        }
        Ok(EmbeddingModel {
            dim,
            vectors: Arc::new(vectors),
            unigram: UnigramModel::default(),
            sif_a: DEFAULT_SIF_A,
            common_component: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn common_component(&self) -> Option<&[f64]> {
        self.common_component.as_deref()
    }

    /// Sets the component removed from SIF embeddings; it is normalized to unit length.
    pub fn set_common_component(&mut self, u: Option<Vec<f64>>) -> Result<()> {
        self.common_component = match u {
            None => None,
            Some(u) => {
                if u.len() != self.dim {
                    return Err(Error::Dimension(format!("common component has length {}, expected {}", u.len(), self.dim)));
                }
                let n = norm(&u);
                if n == 0.0 {
                    None
                } else {
                    Some(u.iter().map(|x| x / n).collect())
                }
            }
        };
        Ok(())
    }

    pub fn avg_word_embedding(&self, tokens: &[&str]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut n = 0usize;
        for v in tokens.iter().filter_map(|t| self.vectors.get(*t)) {
            add_scaled(&mut acc, v, 1.0);
            n += 1;
        }
        if n > 0 {
            acc.iter_mut().for_each(|x| *x /= n as f64);
        }
        acc
    }

    /// `a/(a + p(w))`-weighted mean of in-vocabulary word vectors, before
    /// common-component removal.
    pub fn sif_raw(&self, sentence: &[&str]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut n = 0usize;
        for w in sentence {
            if let Some(v) = self.vectors.get(*w) {
                let weight = self.sif_a / (self.sif_a + self.unigram.probability(w));
                add_scaled(&mut acc, v, weight);
                n += 1;
            }
        }
        if n > 0 {
            acc.iter_mut().for_each(|x| *x /= n as f64);
        }
        acc
    }

    pub fn sif_sentence_embedding(&self, sentences: &[Vec<&str>]) -> Vec<Vec<f64>> {
        sentences
            .iter()
            .map(|s| {
                let v = self.sif_raw(s);
                match &self.common_component {
                    Some(u) => remove_component(&v, u),
                    None => v,
                }
            })
            .collect()
    }

    /// Mean of the SIF embeddings of the given sentences.
    pub fn sif_text_embedding(&self, sentences: &[Vec<&str>]) -> Vec<f64> {
        mean_vector(&self.sif_sentence_embedding(sentences), self.dim)
    }

    /// Fits the common component as the first right singular vector of the
    /// raw sentence-embedding matrix of `sentences`, and installs it.
    pub fn fit_common_component(&mut self, sentences: &[Vec<&str>]) {
        let rows: Vec<Vec<f64>> = sentences.iter().map(|s| self.sif_raw(s)).collect();
        self.common_component = first_right_singular_vector(&rows, self.dim);
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        let mut out = format!("{} {}\n", words.len(), self.dim);
        for w in words {
            out.push_str(w);
            for x in &self.vectors[w] {
                out.push_str(&format!(" {x}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Reads whitespace-separated vectors: an optional `count dim` header, then
/// `token v1 ... vd` per line. Tokens are lowercased; the first occurrence wins.
pub fn load_vectors(path: &Path) -> Result<EmbeddingModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vectors(&text, &path.display().to_string())
}

pub fn parse_vectors(text: &str, file: &str) -> Result<EmbeddingModel> {
    let mut dim: Option<usize> = None;
    let mut vectors = HashMap::new();
    let err = |line: usize, message: String| Error::Vectors {
        file: file.to_string(),
        line,
        message,
    };
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            dim = Some(fields[1].parse().unwrap());
            continue;
        }
        let values = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| err(i + 1, format!("non-numeric value `{f}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err(i + 1, "non-finite value".into()));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(err(i + 1, format!("row has {} values, expected {d}", values.len())))
            }
            _ => {}
        }
        vectors.entry(fields[0].to_lowercase()).or_insert(values);
    }
    let dim = dim.filter(|d| *d > 0);
    match dim {
        Some(d) if !vectors.is_empty() => EmbeddingModel::new(d, vectors),
        _ => Err(err(0, "no vectors".into())),
    }
}

fn add_scaled(acc: &mut [f64], v: &[f64], s: f64) {
    acc.iter_mut().zip(v).for_each(|(a, x)| *a += s * x);
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// `u·v / (|u||v|)`, 0 when either norm is 0, clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

/// `v - u (u·v)` for a unit vector `u`.
pub fn remove_component(v: &[f64], u: &[f64]) -> Vec<f64> {
    let p = dot(u, v);
    v.iter().zip(u).map(|(x, ui)| x - p * ui).collect()
}

pub fn mean_vector(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for r in rows {
        add_scaled(&mut acc, r, 1.0);
    }
    if !rows.is_empty() {
        acc.iter_mut().for_each(|x| *x /= rows.len() as f64);
    }
    acc
}

/// Top eigenvector of `XᵀX` by power iteration, sign-fixed so its largest
/// magnitude entry is positive. `None` for an all-zero matrix.
pub fn first_right_singular_vector(rows: &[Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    let mut gram = vec![0.0; dim * dim];
    for r in rows {
        for i in 0..dim {
            if r[i] == 0.0 {
                continue;
            }
            for j in 0..dim {
                gram[i * dim + j] += r[i] * r[j];
            }
        }
    }
    let apply = |v: &[f64]| -> Vec<f64> { (0..dim).map(|i| dot(&gram[i * dim..(i + 1) * dim], v)).collect() };

    // Start from the diagonal, which is never orthogonal to the top
    // eigenvector unless the matrix is zero.
    let mut v: Vec<f64> = (0..dim).map(|i| gram[i * dim + i].sqrt() + 1e-3 * (i as f64 + 1.0)).collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    if gram.iter().all(|g| *g == 0.0) {
        return None;
    }
    for _ in 0..10_000 {
        let mut w = apply(&v);
        let n = norm(&w);
        if n == 0.0 {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= n);
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < 1e-14 {
            break;
        }
    }
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Some(v)
}
