//! News corpora: loading, validation and the sampling protocols used by the
//! experiments (holdout split, per-class subsampling, content truncation).

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::textproc;

/// Ground-truth label. `Fake` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    True = 0,
    Fake = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::True),
            1 => Some(Label::Fake),
            _ => None,
        }
    }

    fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "fake" => Some(Label::Fake),
            "0" | "true" | "real" => Some(Label::True),
            _ => None,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        Label::from_u8(v).ok_or_else(|| format!("label must be 0 or 1, got {v}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsArticle {
    pub id: String,
    pub headline: String,
    /// Paragraphs are separated by one or more blank lines.
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Externally produced headline clickbait score, in [0, 1] or [0, 100]; ingested, never computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clickbait_score: Option<f64>,
}

impl NewsArticle {
    pub fn new(id: impl Into<String>, headline: impl Into<String>, body: impl Into<String>) -> Self {
        NewsArticle {
            id: id.into(),
            headline: headline.into(),
            body: body.into(),
            label: None,
            source: None,
            clickbait_score: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn paragraphs(&self) -> Vec<&str> {
        textproc::split_paragraphs(&self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub articles: Vec<NewsArticle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LabelCounts {
    pub fake: usize,
    pub true_: usize,
    pub unlabeled: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl Corpus {
    /// Builds a corpus, rejecting empty or duplicate ids.
    pub fn new(name: impl Into<String>, articles: Vec<NewsArticle>) -> Result<Corpus> {
        let mut seen = HashSet::new();
        for a in &articles {
            if a.id.is_empty() {
                return Err(Error::InvalidArgument("article id must be nonempty".into()));
            }
            if !seen.insert(a.id.as_str()) {
                return Err(Error::DuplicateId(a.id.clone()));
            }
        }
        Ok(Corpus {
            name: name.into(),
            articles,
        })
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.articles.iter().map(|a| a.id.as_str())
    }

    pub fn label_counts(&self) -> LabelCounts {
        let mut c = LabelCounts::default();
        for a in &self.articles {
            match a.label {
                Some(Label::Fake) => c.fake += 1,
                Some(Label::True) => c.true_ += 1,
                None => c.unlabeled += 1,
            }
        }
        c
    }

    /// Labels as 0/1, failing on the first unlabeled article.
    pub fn labels(&self) -> Result<Vec<u8>> {
        self.articles
            .iter()
            .map(|a| a.label.map(Label::as_u8).ok_or_else(|| Error::Unlabeled(a.id.clone())))
            .collect()
    }

    fn require_labeled(&self) -> Result<()> {
        match self.articles.iter().find(|a| a.label.is_none()) {
            Some(a) => Err(Error::Unlabeled(a.id.clone())),
            None => Ok(()),
        }
    }

    /// Keeps the articles whose index is selected, in load order.
    pub fn select(&self, name: impl Into<String>, keep: &[bool]) -> Corpus {
        Corpus {
            name: name.into(),
            articles: self
                .articles
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(a, _)| a.clone())
                .collect(),
        }
    }

    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Corpus {
        let mut keep = vec![false; self.len()];
        for &i in indices {
            keep[i] = true;
        }
        self.select(name, &keep)
    }

    pub fn stats(&self) -> CorpusStats {
        let p = self.len();
        let (mut paragraphs, mut sentences, mut words) = (0usize, 0usize, 0usize);
        for a in &self.articles {
            let doc = textproc::tokenize(&a.body);
            paragraphs += doc.paragraphs.len();
            sentences += doc.sentence_count();
            words += doc.word_count();
        }
        let mean = |x: usize| if p == 0 { 0.0 } else { x as f64 / p as f64 };
        CorpusStats {
            articles: p,
            labels: self.label_counts(),
            mean_paragraphs: mean(paragraphs),
            mean_sentences: mean(sentences),
            mean_words: mean(words),
        }
    }

    /// Writes the corpus as JSON Lines.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for a in &self.articles {
            out.push_str(&serde_json::to_string(a)?);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub articles: usize,
    pub labels: LabelCounts,
    pub mean_paragraphs: f64,
    pub mean_sentences: f64,
    pub mean_words: f64,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(raw).map_err(|e| Error::Record {
        path: path.to_path_buf(),
        line: 0,
        field: "<file>".into(),
        message: format!("not valid UTF-8: {e}"),
    })?;
    let text = text.replace("\r\n", "\n");
    let articles = match format {
        CorpusFormat::Jsonl => parse_jsonl(path, &text)?,
        CorpusFormat::Csv => parse_csv(path, &text)?,
    };
    if articles.is_empty() {
        return Err(Error::NoRecords {
            path: path.to_path_buf(),
        });
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_string();
    let corpus = Corpus::new(name, articles)?;
    let c = corpus.label_counts();
    tracing::info!(
        path = %path.display(),
        articles = corpus.len(),
        fake = c.fake,
        true_ = c.true_,
        unlabeled = c.unlabeled,
        "loaded corpus"
    );
    Ok(corpus)
}

fn record_err(path: &Path, line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Record {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_jsonl(path: &Path, text: &str) -> Result<Vec<NewsArticle>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line)
            .map_err(|e| record_err(path, lineno, "<record>", e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| record_err(path, lineno, "<record>", "expected a JSON object"))?;
        let string_field = |name: &str| -> Result<String> {
            match obj.get(name) {
                Some(Value::String(s)) => Ok(s.replace("\r\n", "\n")),
                Some(Value::Number(n)) if name == "id" => Ok(n.to_string()),
                Some(_) => Err(record_err(path, lineno, name, "expected a string")),
                None => Err(record_err(path, lineno, name, "missing")),
            }
        };
        let id = string_field("id")?;
        if id.is_empty() {
            return Err(record_err(path, lineno, "id", "empty"));
        }
        let label = match obj.get("label") {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => match n.as_u64().and_then(|v| u8::try_from(v).ok()).and_then(Label::from_u8) {
                Some(l) => Some(l),
                None => return Err(record_err(path, lineno, "label", format!("must be 0 or 1, got {n}"))),
            },
            Some(Value::Bool(b)) => Some(if *b { Label::Fake } else { Label::True }),
            Some(Value::String(s)) => match Label::parse(s) {
                Some(l) => Some(l),
                None => return Err(record_err(path, lineno, "label", format!("unrecognized label `{s}`"))),
            },
            Some(_) => return Err(record_err(path, lineno, "label", "unsupported type")),
        };
        let source = match obj.get("source") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(record_err(path, lineno, "source", "expected a string")),
        };
        let clickbait_score = match obj.get("clickbait_score") {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => n.as_f64(),
            Some(_) => return Err(record_err(path, lineno, "clickbait_score", "expected a number")),
        };
        out.push(NewsArticle {
            id,
            headline: string_field("headline")?,
            body: string_field("body")?,
            label,
            source,
            clickbait_score,
        });
    }
    Ok(out)
}

fn parse_csv(path: &Path, text: &str) -> Result<Vec<NewsArticle>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_c, head_c, body_c) = match (col("id"), col("headline"), col("body")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        (a, b, _) => {
            let missing = if a.is_none() {
                "id"
            } else if b.is_none() {
                "headline"
            } else {
                "body"
            };
            return Err(record_err(path, 1, missing, "missing column"));
        }
    };
    let (label_c, source_c, score_c) = (col("label"), col("source"), col("clickbait_score"));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let lineno = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |c: usize, name: &str| -> Result<String> {
            rec.get(c)
                .map(str::to_string)
                .ok_or_else(|| record_err(path, lineno, name, "missing"))
        };
        let id = get(id_c, "id")?;
        if id.is_empty() {
            return Err(record_err(path, lineno, "id", "empty"));
        }
        let label = match label_c.and_then(|c| rec.get(c)).map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(Label::parse(s).ok_or_else(|| record_err(path, lineno, "label", format!("unrecognized label `{s}`")))?),
        };
        let source = source_c.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()).map(str::to_string);
        let clickbait_score = match score_c.and_then(|c| rec.get(c)).map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(s.parse::<f64>().map_err(|e| record_err(path, lineno, "clickbait_score", e.to_string()))?),
        };
        out.push(NewsArticle {
            id,
            headline: get(head_c, "headline")?,
            body: get(body_c, "body")?,
            label,
            source,
            clickbait_score,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

/// Round half up, tolerant of representation noise such as `0.8 * 240`.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    let in_train = split_mask(corpus, spec)?;
    let in_test: Vec<bool> = in_train.iter().map(|b| !b).collect();
    Ok((
        corpus.select(format!("{}-train", corpus.name), &in_train),
        corpus.select(format!("{}-test", corpus.name), &in_test),
    ))
}

/// Training-set membership per article, as used by [`split`].
pub fn split_mask(corpus: &Corpus, spec: &SplitSpec) -> Result<Vec<bool>> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must lie strictly between 0 and 1, got {}",
            spec.train_fraction
        )));
    }
    let p = corpus.len();
    let target = round_half_up(spec.train_fraction * p as f64).min(p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; p];

    if spec.stratified {
        corpus.require_labeled()?;
        let mut groups: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for (i, a) in corpus.articles.iter().enumerate() {
            groups.entry(a.label.unwrap()).or_default().push(i);
        }
        // Per-class quotas, then reconcile with the overall target by fractional remainder.
        let mut quotas: Vec<(Label, usize, f64)> = groups
            .iter()
            .map(|(&l, idx)| {
                let exact = spec.train_fraction * idx.len() as f64;
                let q = round_half_up(exact).min(idx.len());
                (l, q, exact - q as f64)
            })
            .collect();
        let mut total: usize = quotas.iter().map(|q| q.1).sum();
        while total < target {
            let best = quotas
                .iter_mut()
                .filter(|q| q.1 < groups[&q.0].len())
                .max_by(|a, b| a.2.total_cmp(&b.2))
                .expect("target never exceeds corpus size");
            best.1 += 1;
            best.2 -= 1.0;
            total += 1;
        }
        while total > target {
            let best = quotas
                .iter_mut()
                .filter(|q| q.1 > 0)
                .min_by(|a, b| a.2.total_cmp(&b.2))
                .expect("total > 0");
            best.1 -= 1;
            best.2 += 1.0;
            total -= 1;
        }
        for (label, quota, _) in quotas {
            let mut idx = groups[&label].clone();
            idx.shuffle(&mut rng);
            for &i in &idx[..quota] {
                in_train[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..p).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..target] {
            in_train[i] = true;
        }
    }

    Ok(in_train)
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1], got {f}")))
    }
}

/// Samples `fake_fraction` of the fake articles and `true_fraction` of the
/// true ones without replacement. Output keeps load order.
pub fn subsample_by_class(corpus: &Corpus, fake_fraction: f64, true_fraction: f64, seed: u64) -> Result<Corpus> {
    check_fraction("fake_fraction", fake_fraction)?;
    check_fraction("true_fraction", true_fraction)?;
    corpus.require_labeled()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; corpus.len()];
    for (label, fraction) in [(Label::Fake, fake_fraction), (Label::True, true_fraction)] {
        let mut idx: Vec<usize> = (0..corpus.len())
            .filter(|&i| corpus.articles[i].label == Some(label))
            .collect();
        let n = round_half_up(fraction * idx.len() as f64).min(idx.len());
        idx.shuffle(&mut rng);
        for &i in &idx[..n] {
            keep[i] = true;
        }
    }
    Ok(corpus.select(
        format!("{}-sub{:.2}-{:.2}", corpus.name, fake_fraction, true_fraction),
        &keep,
    ))
}

/// Uniform subsample of the whole corpus, used for training-size curves.
pub fn subsample(corpus: &Corpus, fraction: f64, seed: u64) -> Result<Corpus> {
    check_fraction("fraction", fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    let n = round_half_up(fraction * idx.len() as f64).min(idx.len());
    idx.shuffle(&mut rng);
    let mut keep = vec![false; corpus.len()];
    for &i in &idx[..n] {
        keep[i] = true;
    }
    Ok(corpus.select(format!("{}-frac{:.2}", corpus.name, fraction), &keep))
}

/// Headline plus `n_paragraphs` randomly chosen body paragraphs, kept in
/// their original order. `n_paragraphs = 0` leaves only the headline.
pub fn truncate_content(article: &NewsArticle, n_paragraphs: usize, seed: u64) -> NewsArticle {
    let paragraphs = article.paragraphs();
    if n_paragraphs >= paragraphs.len() {
        return article.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, paragraphs.len(), n_paragraphs).into_vec();
    chosen.sort_unstable();
    let body = chosen.iter().map(|&i| paragraphs[i]).collect::<Vec<_>>().join("\n\n");
    NewsArticle {
        body,
        ..article.clone()
    }
}

/// Indices (0-based) of the paragraphs `truncate_content` keeps; `None` when
/// nothing is dropped.
pub fn truncated_paragraph_indices(article: &NewsArticle, n_paragraphs: usize, seed: u64) -> Option<Vec<usize>> {
    let total = article.paragraphs().len();
    if n_paragraphs >= total {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, total, n_paragraphs).into_vec();
    chosen.sort_unstable();
    Some(chosen)
}

/// Stable 64-bit FNV-1a, used to derive per-article seeds.
pub fn stable_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn article_seed(seed: u64, id: &str) -> u64 {
    seed ^ stable_hash(id).rotate_left(17)
}

pub fn default_corpus_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.jsonl"))
}
