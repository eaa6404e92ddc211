//! Penn-style bracketed constituency trees and the shallow (POS tag) and
//! deep (rewrite rule) syntax counts read off them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Raw term counts keyed by term string.
pub type TermCounts = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstituencyTree {
    pub label: String,
    pub children: Vec<ConstituencyTree>,
    /// Present exactly on leaves (preterminals), which carry the word.
    pub token: Option<String>,
}

impl ConstituencyTree {
    pub fn leaf(label: impl Into<String>, token: impl Into<String>) -> Self {
        ConstituencyTree {
            label: label.into(),
            children: Vec::new(),
            token: Some(token.into()),
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<ConstituencyTree>) -> Self {
        ConstituencyTree {
            label: label.into(),
            children,
            token: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    /// (POS tag, token) pairs in left-to-right order.
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match &self.token {
            Some(t) => out.push((&self.label, t)),
            None => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Self::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Self::node_count).sum::<usize>()
    }
}

impl fmt::Display for ConstituencyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.token {
            Some(t) => write!(f, "({} {})", self.label, t),
            None => {
                write!(f, "({}", self.label)?;
                for c in &self.children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Lex<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> Vec<(usize, Lex<'_>)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((i, Lex::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Lex::Close));
                i += 1;
            }
            b if b.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b'(' | b')') && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                out.push((start, Lex::Atom(&text[start..i])));
            }
        }
    }
    out
}

struct Parser<'a> {
    toks: Vec<(usize, Lex<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::TreeParse {
            offset,
            message: message.into(),
        }
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len)
    }

    fn tree(&mut self) -> Result<ConstituencyTree> {
        let open_at = self.offset();
        match self.toks.get(self.pos) {
            Some((_, Lex::Open)) => self.pos += 1,
            Some((o, _)) => return Err(self.err(*o, "expected '('")),
            None => return Err(self.err(self.len, "unbalanced parentheses: unexpected end of input")),
        }
        let label = match self.toks.get(self.pos) {
            Some((_, Lex::Atom(a))) => {
                self.pos += 1;
                a.to_string()
            }
            Some((o, _)) => return Err(self.err(*o, "empty label")),
            None => return Err(self.err(self.len, "unbalanced parentheses: unexpected end of input")),
        };
        match self.toks.get(self.pos) {
            Some((_, Lex::Atom(tok))) => {
                let tok = tok.to_string();
                self.pos += 1;
                match self.toks.get(self.pos) {
                    Some((_, Lex::Close)) => {
                        self.pos += 1;
                        Ok(ConstituencyTree::leaf(label, tok))
                    }
                    Some((o, Lex::Open)) => Err(self.err(*o, format!("leaf `{label}` has children"))),
                    Some((o, Lex::Atom(_))) => Err(self.err(*o, format!("leaf `{label}` has more than one token"))),
                    None => Err(self.err(self.len, "unbalanced parentheses: unexpected end of input")),
                }
            }
            Some((_, Lex::Open)) => {
                let mut children = Vec::new();
                loop {
                    match self.toks.get(self.pos) {
                        Some((_, Lex::Open)) => children.push(self.tree()?),
                        Some((_, Lex::Close)) => {
                            self.pos += 1;
                            return Ok(ConstituencyTree::node(label, children));
                        }
                        Some((o, Lex::Atom(_))) => {
                            return Err(self.err(*o, format!("node `{label}` mixes tokens and subtrees")))
                        }
                        None => return Err(self.err(self.len, "unbalanced parentheses: unexpected end of input")),
                    }
                }
            }
            Some((_, Lex::Close)) => Err(self.err(open_at, format!("node `{label}` has no children"))),
            None => Err(self.err(self.len, "unbalanced parentheses: unexpected end of input")),
        }
    }
}

pub fn parse_bracketed(text: &str) -> Result<ConstituencyTree> {
    let mut p = Parser {
        toks: lex(text),
        pos: 0,
        len: text.len(),
    };
    let tree = p.tree()?;
    if let Some((o, t)) = p.toks.get(p.pos) {
        let message = if *t == Lex::Close {
            "unbalanced parentheses: extra ')'"
        } else {
            "trailing input after tree"
        };
        return Err(p.err(*o, message));
    }
    Ok(tree)
}

/// Preterminal label counts across all sentences.
pub fn pos_counts(trees: &[ConstituencyTree]) -> TermCounts {
    let mut counts = TermCounts::new();
    for t in trees {
        for (pos, _) in t.leaves() {
            *counts.entry(pos.to_string()).or_default() += 1;
        }
    }
    counts
}

/// One production per internal node and one lexical production per leaf.
/// Lexical tokens are lowercased; structural labels keep their case.
pub fn rewrite_rules(trees: &[ConstituencyTree]) -> TermCounts {
    fn walk(t: &ConstituencyTree, counts: &mut TermCounts) {
        let rule = match &t.token {
            Some(tok) => format!("{} -> '{}'", t.label, tok.to_lowercase()),
            None => {
                let rhs: Vec<&str> = t.children.iter().map(|c| c.label.as_str()).collect();
                format!("{} -> {}", t.label, rhs.join(" "))
            }
        };
        *counts.entry(rule).or_default() += 1;
        for c in &t.children {
            walk(c, counts);
        }
    }
    let mut counts = TermCounts::new();
    for t in trees {
        walk(t, &mut counts);
    }
    counts
}

/// Where a parsed sentence sits in its article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SentenceLocator {
    /// `Some(0)` is the headline, `Some(k)` body paragraph `k` (1-based);
    /// `None` when the sidecar only gives a running sentence index.
    pub paragraph: Option<usize>,
    pub sentence: usize,
}

impl SentenceLocator {
    pub fn parse(s: &str) -> Option<SentenceLocator> {
        match s.split_once('.') {
            Some((p, i)) => Some(SentenceLocator {
                paragraph: Some(p.parse().ok()?),
                sentence: i.parse().ok()?,
            }),
            None => Some(SentenceLocator {
                paragraph: None,
                sentence: s.parse().ok()?,
            }),
        }
    }

    pub fn is_headline(&self) -> bool {
        self.paragraph == Some(0)
    }
}

impl fmt::Display for SentenceLocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.paragraph {
            Some(p) => write!(f, "{p}.{}", self.sentence),
            None => write!(f, "{}", self.sentence),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceParse {
    pub locator: SentenceLocator,
    pub tree: ConstituencyTree,
}

/// Which sentences of an article to draw syntax from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentSelection<'a> {
    All,
    /// Headline only.
    Headline,
    /// Headline plus the listed 0-based body paragraphs.
    HeadlineAnd(&'a [usize]),
    /// Body only, all paragraphs.
    Body,
}

impl ContentSelection<'_> {
    fn keeps(&self, loc: &SentenceLocator) -> bool {
        match (self, loc.paragraph) {
            (ContentSelection::All, _) => true,
            (ContentSelection::Headline, p) => p == Some(0),
            (ContentSelection::Body, p) => p != Some(0),
            (ContentSelection::HeadlineAnd(_), Some(0)) => true,
            (ContentSelection::HeadlineAnd(keep), Some(p)) => keep.contains(&(p - 1)),
            // Paragraph unknown: cannot tell whether it survived truncation.
            (ContentSelection::HeadlineAnd(_), None) => false,
        }
    }
}

/// Per-article sentence parses loaded from a `*.trees.tsv` file:
/// `<article-id>\t<locator>\t<bracketed tree>` per line, where the locator is
/// `P.S` (paragraph `P`, 0 = headline; sentence `S`) or a bare sentence index.
#[derive(Debug, Clone, Default)]
pub struct ParseSidecar {
    parses: HashMap<String, Vec<SentenceParse>>,
}

impl ParseSidecar {
    pub fn parse_str(text: &str, file: &str) -> Result<ParseSidecar> {
        let mut parses: HashMap<String, Vec<SentenceParse>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Sidecar {
                file: file.to_string(),
                line: i + 1,
                message,
            };
            let mut parts = line.splitn(3, '\t');
            let (Some(id), Some(loc), Some(tree)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected `<id>\\t<sentence-index>\\t<tree>`".into()));
            };
            let locator = SentenceLocator::parse(loc.trim()).ok_or_else(|| err(format!("bad sentence index `{loc}`")))?;
            let tree = parse_bracketed(tree).map_err(|e| err(e.to_string()))?;
            parses.entry(id.to_string()).or_default().push(SentenceParse { locator, tree });
        }
        for v in parses.values_mut() {
            v.sort_by_key(|p| p.locator);
        }
        Ok(ParseSidecar { parses })
    }

    pub fn load(path: &Path) -> Result<ParseSidecar> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text, &path.display().to_string())
    }

    pub fn insert(&mut self, id: impl Into<String>, locator: SentenceLocator, tree: ConstituencyTree) {
        let v = self.parses.entry(id.into()).or_default();
        v.push(SentenceParse { locator, tree });
        v.sort_by_key(|p| p.locator);
    }

    pub fn contains(&self, id: &str) -> bool {
        self.parses.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.parses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parses.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.parses.keys().map(String::as_str)
    }

    pub fn sentences(&self, id: &str) -> &[SentenceParse] {
        self.parses.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn trees(&self, id: &str, selection: ContentSelection<'_>) -> Vec<ConstituencyTree> {
        self.sentences(id)
            .iter()
            .filter(|p| selection.keeps(&p.locator))
            .map(|p| p.tree.clone())
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut ids: Vec<&String> = self.parses.keys().collect();
        ids.sort();
        let mut out = String::new();
        for id in ids {
            for p in &self.parses[id] {
                out.push_str(&format!("{id}\t{}\t{}\n", p.locator, p.tree));
            }
        }
        out
    }
}
