//! File-based category lexicons with prefix wildcards, phrase lists, and a
//! scored sentiment lexicon.
//!
//! Pack layout:
//!
//! ```text
//! <pack>/categories/<name>.txt   one pattern per line
//! <pack>/phrases/<name>.txt      one phrase per line
//! <pack>/scored/sentiment.tsv    word<TAB>score, score in [-1, 1]
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. A pattern is one or
//! more lowercase words separated by single spaces; a word may end in `*`
//! (prefix match) or be the literal `<num>` (any token that parses as a
//! number). Multi-word patterns cover consecutive word tokens.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textproc::TokenizedDoc;

/// Categories every pack must provide.
pub const REQUIRED_CATEGORIES: &[&str] = &[
    "swear",
    "netspeak",
    "assent",
    "nonfluency",
    "filler",
    "positive",
    "negative",
    "anxiety",
    "anger",
    "sadness",
    "insight",
    "causation",
    "discrepancy",
    "tentative",
    "certainty",
    "differentiation",
    "see",
    "hear",
    "feel",
    "function",
    "stop",
    "biased",
    "report",
    "factive",
];

pub const REQUIRED_PHRASE_LISTS: &[&str] = &["clickbait_phrases", "clickbait_expressions"];

pub const INFORMALITY_CATEGORIES: &[&str] = &["swear", "netspeak", "assent", "nonfluency", "filler"];
pub const EMOTION_CATEGORIES: &[&str] = &["positive", "negative", "anxiety", "anger", "sadness"];
pub const COGNITIVE_CATEGORIES: &[&str] =
    &["insight", "causation", "discrepancy", "tentative", "certainty", "differentiation"];
pub const PERCEPTUAL_CATEGORIES: &[&str] = &["see", "hear", "feel"];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum WordPattern {
    Exact(String),
    Prefix(String),
    Number,
}

impl WordPattern {
    fn matches(&self, word: &str) -> bool {
        match self {
            WordPattern::Exact(w) => w == word,
            WordPattern::Prefix(p) => word.starts_with(p.as_str()),
            WordPattern::Number => {
                let cleaned: String = word.chars().filter(|c| *c != ',').collect();
                !cleaned.is_empty() && cleaned.parse::<f64>().is_ok()
            }
        }
    }
}

/// A single- or multi-word pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    words: Vec<WordPattern>,
}

impl Pattern {
    pub fn parse(line: &str) -> std::result::Result<Pattern, String> {
        let lower = line.trim().to_lowercase();
        if lower.is_empty() {
            return Err("empty pattern".into());
        }
        let mut words = Vec::new();
        for w in lower.split(' ') {
            if w.is_empty() {
                return Err(format!("pattern `{line}` has repeated spaces"));
            }
            let wp = if w == "<num>" {
                WordPattern::Number
            } else if let Some(prefix) = w.strip_suffix('*') {
                if prefix.is_empty() || prefix.contains('*') {
                    return Err(format!("malformed pattern `{w}`: '*' must follow a nonempty prefix"));
                }
                WordPattern::Prefix(prefix.to_string())
            } else if w.contains('*') {
                return Err(format!("malformed pattern `{w}`: '*' may only appear at the end"));
            } else {
                WordPattern::Exact(w.to_string())
            };
            words.push(wp);
        }
        Ok(Pattern { words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn matches_at(&self, words: &[&str], i: usize) -> bool {
        i + self.words.len() <= words.len()
            && self.words.iter().zip(&words[i..]).all(|(p, w)| p.matches(w))
    }
}

/// Pattern set with an exact-word fast path.
#[derive(Debug, Clone, Default)]
struct Matcher {
    exact: HashSet<String>,
    other: Vec<Pattern>,
}

impl Matcher {
    fn new(patterns: &[Pattern]) -> Matcher {
        let mut m = Matcher::default();
        for p in patterns {
            match p.words.as_slice() {
                [WordPattern::Exact(w)] => {
                    m.exact.insert(w.clone());
                }
                _ => m.other.push(p.clone()),
            }
        }
        m
    }

    /// Length of the longest pattern matching at position `i`.
    fn longest_at(&self, words: &[&str], i: usize) -> Option<usize> {
        let mut best = if self.exact.contains(words[i]) { Some(1) } else { None };
        for p in &self.other {
            if best.is_some_and(|b| b >= p.len()) {
                continue;
            }
            if p.matches_at(words, i) {
                best = Some(p.len());
            }
        }
        best
    }
}

/// Scans left to right taking the longest match at each position.
/// Returns (number of matches, number of tokens covered).
fn scan(words: &[&str], matchers: &[&Matcher]) -> (usize, usize) {
    let (mut matches, mut covered, mut i) = (0, 0, 0);
    while i < words.len() {
        let len = matchers.iter().filter_map(|m| m.longest_at(words, i)).max();
        match len {
            Some(l) => {
                matches += 1;
                covered += l;
                i += l;
            }
            None => i += 1,
        }
    }
    (matches, covered)
}

#[derive(Debug, Clone)]
pub struct CategoryLexicon {
    pub name: String,
    patterns: Vec<Pattern>,
    matcher: Matcher,
}

impl CategoryLexicon {
    pub fn new(name: impl Into<String>, patterns: &[&str]) -> Result<CategoryLexicon> {
        let name = name.into();
        let parsed = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Pattern::parse(p).map_err(|message| Error::Lexicon {
                    file: name.clone(),
                    line: i + 1,
                    message,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_patterns(name, parsed))
    }

    fn from_patterns(name: String, patterns: Vec<Pattern>) -> CategoryLexicon {
        let mut seen = HashSet::new();
        let patterns: Vec<Pattern> = patterns.into_iter().filter(|p| seen.insert(p.clone())).collect();
        let matcher = Matcher::new(&patterns);
        CategoryLexicon {
            name,
            patterns,
            matcher,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.matcher.longest_at(&[word], 0).is_some()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScoredLexicon {
    scores: HashMap<String, f64>,
}

impl ScoredLexicon {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Result<ScoredLexicon> {
        let mut scores = HashMap::new();
        for (w, s) in entries {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::Lexicon {
                    file: "sentiment".into(),
                    line: 0,
                    message: format!("score {s} for `{w}` outside [-1, 1]"),
                });
            }
            scores.insert(w.to_lowercase(), s);
        }
        Ok(ScoredLexicon { scores })
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.scores.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PhraseList {
    pub name: String,
    phrases: Vec<Pattern>,
    matcher: Matcher,
}

impl PhraseList {
    pub fn new(name: impl Into<String>, phrases: &[&str]) -> Result<PhraseList> {
        let name = name.into();
        let parsed = phrases
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Pattern::parse(p).map_err(|message| Error::Lexicon {
                    file: name.clone(),
                    line: i + 1,
                    message,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_patterns(name, parsed))
    }

    fn from_patterns(name: String, phrases: Vec<Pattern>) -> PhraseList {
        let matcher = Matcher::new(&phrases);
        PhraseList { name, phrases, matcher }
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// Word-token count matching the category and its share of all word tokens.
pub fn count_category(doc: &TokenizedDoc, category: &CategoryLexicon) -> (usize, f64) {
    count_union(&doc.lowercase_words(), &[category])
}

/// Tokens matching any of the categories, each token counted once.
pub fn count_union(words: &[&str], categories: &[&CategoryLexicon]) -> (usize, f64) {
    let matchers: Vec<&Matcher> = categories.iter().map(|c| &c.matcher).collect();
    let (_, covered) = scan(words, &matchers);
    let proportion = if words.is_empty() {
        0.0
    } else {
        covered as f64 / words.len() as f64
    };
    (covered, proportion)
}

/// Non-overlapping phrase occurrences, longest match first, left to right.
pub fn count_phrases(words: &[&str], phrases: &PhraseList) -> usize {
    scan(words, &[&phrases.matcher]).0
}

/// Mean score of the word tokens found in the lexicon; 0 when none match.
pub fn polarity(doc: &TokenizedDoc, scored: &ScoredLexicon) -> f64 {
    let (sum, n) = doc
        .words()
        .filter_map(|t| scored.get(&t.lowercase))
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone)]
pub struct LexiconPack {
    pub categories: BTreeMap<String, CategoryLexicon>,
    pub phrases: BTreeMap<String, PhraseList>,
    pub sentiment: ScoredLexicon,
}

impl LexiconPack {
    pub fn category(&self, name: &str) -> &CategoryLexicon {
        self.categories
            .get(name)
            .unwrap_or_else(|| panic!("lexicon pack validated without category `{name}`"))
    }

    pub fn categories_named(&self, names: &[&str]) -> Vec<&CategoryLexicon> {
        names.iter().map(|n| self.category(n)).collect()
    }

    pub fn phrase_list(&self, name: &str) -> &PhraseList {
        self.phrases
            .get(name)
            .unwrap_or_else(|| panic!("lexicon pack validated without phrase list `{name}`"))
    }

    /// Checks that every required category, phrase list and the sentiment
    /// lexicon are present.
    pub fn validate(&self) -> Result<()> {
        let mut missing: Vec<String> = REQUIRED_CATEGORIES
            .iter()
            .filter(|n| !self.categories.contains_key(**n))
            .map(|n| n.to_string())
            .collect();
        missing.extend(
            REQUIRED_PHRASE_LISTS
                .iter()
                .filter(|n| !self.phrases.contains_key(**n))
                .map(|n| format!("phrases/{n}")),
        );
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingCategories(missing))
        }
    }
}

fn pattern_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

fn load_patterns(path: &Path) -> Result<(String, Vec<Pattern>)> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let mut patterns = Vec::new();
    for (line, text) in pattern_lines(path)? {
        let p = Pattern::parse(&text).map_err(|message| Error::Lexicon {
            file: path.display().to_string(),
            line,
            message,
        })?;
        patterns.push(p);
    }
    Ok((name, patterns))
}

fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<std::path::PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_scored(path: &Path) -> Result<ScoredLexicon> {
    let mut entries = Vec::new();
    for (line, text) in pattern_lines(path)? {
        let err = |message: String| Error::Lexicon {
            file: path.display().to_string(),
            line,
            message,
        };
        let (word, score) = text
            .split_once('\t')
            .ok_or_else(|| err("expected `word<TAB>score`".into()))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|e| err(format!("bad score `{score}`: {e}")))?;
        if !(-1.0..=1.0).contains(&score) {
            return Err(err(format!("score {score} outside [-1, 1]")));
        }
        entries.push((word.trim().to_lowercase(), score));
    }
    ScoredLexicon::new(entries)
}

pub fn load_lexicon_pack(dir: &Path) -> Result<LexiconPack> {
    let mut categories = BTreeMap::new();
    for path in files_with_ext(&dir.join("categories"), "txt")? {
        let (name, patterns) = load_patterns(&path)?;
        categories.insert(name.clone(), CategoryLexicon::from_patterns(name, patterns));
    }
    let mut phrases = BTreeMap::new();
    for path in files_with_ext(&dir.join("phrases"), "txt")? {
        let (name, patterns) = load_patterns(&path)?;
        phrases.insert(name.clone(), PhraseList::from_patterns(name, patterns));
    }
    let sentiment_path = dir.join("scored").join("sentiment.tsv");
    if !sentiment_path.is_file() {
        let mut missing: Vec<String> = REQUIRED_CATEGORIES
            .iter()
            .filter(|n| !categories.contains_key(**n))
            .map(|n| n.to_string())
            .collect();
        missing.push("scored/sentiment".into());
        return Err(Error::MissingCategories(missing));
    }
    let pack = LexiconPack {
        categories,
        phrases,
        sentiment: load_scored(&sentiment_path)?,
    };
    pack.validate()?;
    Ok(pack)
}
