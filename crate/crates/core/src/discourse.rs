//! Rhetorical-structure trees ingested from discourse-parser sidecars, and
//! the relation counts that form the discourse-level features.
//!
//! Tree grammar (whitespace-insensitive):
//!
//! ```text
//! tree       := leaf | node
//! leaf       := '"' text '"'            (\" and \\ escapes)
//! node       := '(' relation '[' nuc ']' tree+ ')'
//! nuc        := [NS]+  |  word (',' word)*   word ∈ {nucleus, satellite, n, s}
//! ```
//!
//! The bracket lists the nuclearity of each child in order, so
//! `(elaboration[NS] "a" "b")` makes "a" the nucleus. The sidecar file
//! (`*.rst.txt`) holds one `<article-id>\t<tree>` per line.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::TermCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nuclearity {
    Nucleus,
    Satellite,
}

impl Nuclearity {
    fn tag(self) -> &'static str {
        match self {
            Nuclearity::Nucleus => "nucleus",
            Nuclearity::Satellite => "satellite",
        }
    }

    fn letter(self) -> char {
        match self {
            Nuclearity::Nucleus => 'N',
            Nuclearity::Satellite => 'S',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstNode {
    /// Relation among this node's children; `span` on leaves.
    pub relation: String,
    /// Role of this node within its parent; the root is a nucleus.
    pub nuclearity: Nuclearity,
    pub children: Vec<RstNode>,
    pub text_span: Option<String>,
}

impl RstNode {
    pub fn leaf(text: impl Into<String>, nuclearity: Nuclearity) -> RstNode {
        RstNode {
            relation: "span".into(),
            nuclearity,
            children: Vec::new(),
            text_span: Some(text.into()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.text_span.is_some()
    }

    pub fn internal_count(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(Self::internal_count).sum::<usize>()
        }
    }

    pub fn to_bracketed(&self) -> String {
        match &self.text_span {
            Some(t) => format!("\"{}\"", t.replace('\\', "\\\\").replace('"', "\\\"")),
            None => {
                let nuc: String = self.children.iter().map(|c| c.nuclearity.letter()).collect();
                let kids: Vec<String> = self.children.iter().map(Self::to_bracketed).collect();
                format!("({}[{}] {})", self.relation, nuc, kids.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationScheme {
    RelationsOnly,
    #[default]
    RelationsAndNuclearity,
}

/// Counts relations of internal nodes; under `RelationsAndNuclearity` also
/// counts each child's nuclearity tag, plus `span` for the nucleus of a
/// mononuclear relation.
pub fn relation_counts(tree: &RstNode, scheme: RelationScheme) -> TermCounts {
    fn walk(n: &RstNode, scheme: RelationScheme, out: &mut TermCounts) {
        if n.is_leaf() {
            return;
        }
        *out.entry(n.relation.clone()).or_default() += 1;
        if scheme == RelationScheme::RelationsAndNuclearity {
            let nuclei = n.children.iter().filter(|c| c.nuclearity == Nuclearity::Nucleus).count();
            for c in &n.children {
                *out.entry(c.nuclearity.tag().to_string()).or_default() += 1;
                if c.nuclearity == Nuclearity::Nucleus && nuclei == 1 {
                    *out.entry("span".to_string()).or_default() += 1;
                }
            }
        }
        for c in &n.children {
            walk(c, scheme, out);
        }
    }
    let mut out = TermCounts::new();
    walk(tree, scheme, &mut out);
    out
}

struct RstParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> RstParser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::TreeParse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn node(&mut self, nuclearity: Nuclearity) -> Result<RstNode> {
        self.skip_ws();
        match self.peek() {
            Some('"') => self.leaf(nuclearity),
            Some('(') => self.internal(nuclearity),
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn leaf(&mut self, nuclearity: Nuclearity) -> Result<RstNode> {
        self.pos += 1;
        let mut text = String::new();
        let mut chars = self.src[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(RstNode::leaf(text, nuclearity));
                }
                '\\' => match chars.next() {
                    Some((_, e)) => text.push(e),
                    None => break,
                },
                c => text.push(c),
            }
        }
        self.pos = self.src.len();
        Err(self.err("unterminated text span"))
    }

    fn internal(&mut self, nuclearity: Nuclearity) -> Result<RstNode> {
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '[' || c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                break;
            }
            self.pos += c.len_utf8();
        }
        let relation = self.src[start..self.pos].to_lowercase();
        if relation.is_empty() {
            return Err(self.err("empty relation label"));
        }
        if self.peek() != Some('[') {
            return Err(self.err(format!("relation `{relation}` lacks a nuclearity bracket")));
        }
        self.pos += 1;
        let close = self.src[self.pos..]
            .find(']')
            .ok_or_else(|| self.err("unterminated nuclearity bracket"))?;
        let spec = &self.src[self.pos..self.pos + close];
        let roles = parse_nuclearity(spec).map_err(|m| self.err(m))?;
        self.pos += close + 1;
        let mut children = Vec::with_capacity(roles.len());
        for role in &roles {
            children.push(self.node(*role)?);
        }
        self.skip_ws();
        if self.peek() != Some(')') {
            return Err(self.err(format!(
                "relation `{relation}` declares {} children but more follow or ')' is missing",
                roles.len()
            )));
        }
        self.pos += 1;
        Ok(RstNode {
            relation,
            nuclearity,
            children,
            text_span: None,
        })
    }
}

fn parse_nuclearity(spec: &str) -> std::result::Result<Vec<Nuclearity>, String> {
    let spec = spec.trim();
    let word = |w: &str| match w.trim().to_ascii_lowercase().as_str() {
        "n" | "nucleus" => Ok(Nuclearity::Nucleus),
        "s" | "satellite" => Ok(Nuclearity::Satellite),
        other => Err(format!("unknown nuclearity `{other}`")),
    };
    let roles = if spec.contains(',') {
        spec.split(',').map(word).collect::<std::result::Result<Vec<_>, _>>()?
    } else if !spec.is_empty() && spec.chars().all(|c| matches!(c, 'N' | 'S' | 'n' | 's')) {
        spec.chars().map(|c| word(&c.to_string())).collect::<std::result::Result<Vec<_>, _>>()?
    } else {
        vec![word(spec)?]
    };
    if roles.is_empty() {
        return Err("empty nuclearity".into());
    }
    Ok(roles)
}

pub fn parse_rst(text: &str) -> Result<RstNode> {
    let mut p = RstParser { src: text, pos: 0 };
    let tree = p.node(Nuclearity::Nucleus)?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err("trailing input after tree"));
    }
    Ok(tree)
}

pub fn parse_rst_sidecar(text: &str, file: &str) -> Result<HashMap<String, RstNode>> {
    let mut out = HashMap::new();
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
        let (id, tree) = line
            .split_once('\t')
            .ok_or_else(|| err("expected `<article-id>\\t<tree>`".into()))?;
        let tree = parse_rst(tree).map_err(|e| err(e.to_string()))?;
        if out.insert(id.to_string(), tree).is_some() {
            return Err(err(format!("duplicate tree for article `{id}`")));
        }
    }
    Ok(out)
}

pub fn load_rst_sidecar(path: &Path) -> Result<HashMap<String, RstNode>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rst_sidecar(&text, &path.display().to_string())
}
