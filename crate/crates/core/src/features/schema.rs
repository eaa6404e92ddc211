//! Feature schema: named, level-tagged columns, the semantic-feature
//! inventory, and group expressions used to select column subsets.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Lexicon,
    ShallowSyntax,
    DeepSyntax,
    SemanticDia,
    SemanticCba,
    Discourse,
}

impl Level {
    pub const ALL: [Level; 6] = [
        Level::Lexicon,
        Level::ShallowSyntax,
        Level::DeepSyntax,
        Level::SemanticDia,
        Level::SemanticCba,
        Level::Discourse,
    ];

    /// Short group code used in ablation tables.
    pub fn code(self) -> &'static str {
        match self {
            Level::Lexicon => "BOW",
            Level::ShallowSyntax => "POS",
            Level::DeepSyntax => "CFG",
            Level::SemanticDia => "DIA",
            Level::SemanticCba => "CBA",
            Level::Discourse => "RR",
        }
    }

    pub fn from_code(code: &str) -> Option<Level> {
        let c = code.trim().to_ascii_uppercase();
        Level::ALL.into_iter().find(|l| l.code() == c)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Which part of the article a feature reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Whatever content is available (headline plus selected paragraphs).
    Content,
    Headline,
    Body,
    /// Needs both headline and body (headline–body similarity).
    HeadlineAndBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub level: Level,
    /// Slash-separated group path, e.g. `DIA/Quality/Informality` or `BOW`.
    pub group: String,
    /// Additional groups this column is reported under.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also_in: Vec<String>,
    pub side: Side,
}

impl FeatureSpec {
    fn in_group(&self, path: &[String]) -> bool {
        std::iter::once(&self.group)
            .chain(&self.also_in)
            .any(|g| path_has_prefix(g, path))
    }
}

fn split_path(p: &str) -> Vec<String> {
    p.split('/').map(normalize_component).collect()
}

fn normalize_component(c: &str) -> String {
    c.trim()
        .chars()
        .filter(|ch| ch.is_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

fn path_has_prefix(group: &str, prefix: &[String]) -> bool {
    let g = split_path(group);
    g.len() >= prefix.len() && g.iter().zip(prefix).all(|(a, b)| a == b || synonym(a) == synonym(b))
}

fn synonym(c: &str) -> &str {
    match c {
        "cognitiveprocess" | "cognitiveprocesses" => "cognitive",
        "perceptualprocess" | "perceptualprocesses" => "perceptual",
        "clickbaitpatterns" | "generalclickbaitpatterns" => "patterns",
        "sentiments" => "sentiment",
        "punctuations" => "punctuation",
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<FeatureSchema> {
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::SchemaMismatch(format!("duplicate feature name `{}`", f.name)));
            }
        }
        Ok(FeatureSchema { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// SHA-256 over names, levels and groups.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for f in &self.features {
            h.update(f.name.as_bytes());
            h.update([0u8]);
            h.update(f.level.code().as_bytes());
            h.update([0u8]);
            h.update(f.group.as_bytes());
            h.update([1u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn level_range(&self, level: Level) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.features[i].level == level).collect()
    }

    /// Column indices selected by a group expression, in schema order.
    pub fn select(&self, expr: &GroupExpr) -> Vec<usize> {
        (0..self.len()).filter(|&i| expr.matches(&self.features[i])).collect()
    }

    pub fn subset(&self, columns: &[usize]) -> FeatureSchema {
        FeatureSchema {
            features: columns.iter().map(|&i| self.features[i].clone()).collect(),
        }
    }

    /// Columns whose side is usable when only the headline is available.
    pub fn headline_side_columns(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| matches!(self.features[i].side, Side::Content | Side::Headline))
            .collect()
    }
}

/// A feature-group selection such as `BOW+POS+CFG`, `All-RR`,
/// `DIA/Quality/Informality` or `Overall`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupExpr {
    pub text: String,
    include: Vec<Vec<String>>,
    exclude: Vec<Vec<String>>,
}

impl GroupExpr {
    pub fn parse(text: &str) -> Result<GroupExpr> {
        let t = text.trim();
        let lower = t.to_ascii_lowercase();
        let all = || Level::ALL.iter().map(|l| vec![l.code().to_ascii_lowercase()]).collect::<Vec<_>>();
        let (include, exclude) = if lower == "overall" || lower == "all" {
            (all(), Vec::new())
        } else if let Some(rest) = lower.strip_prefix("all-") {
            let ex = rest
                .split('-')
                .map(|a| check_atom(a, t))
                .collect::<Result<Vec<_>>>()?;
            (all(), ex)
        } else {
            let inc = t
                .split('+')
                .map(|a| check_atom(a, t))
                .collect::<Result<Vec<_>>>()?;
            (inc, Vec::new())
        };
        Ok(GroupExpr {
            text: t.to_string(),
            include,
            exclude,
        })
    }

    pub fn matches(&self, f: &FeatureSpec) -> bool {
        self.include.iter().any(|p| f.in_group(p)) && !self.exclude.iter().any(|p| in_primary(f, p))
    }
}

// Exclusions act on a column's own group so an alias cannot drop it twice.
fn in_primary(f: &FeatureSpec, path: &[String]) -> bool {
    path_has_prefix(&f.group, path)
}

fn check_atom(atom: &str, whole: &str) -> Result<Vec<String>> {
    let path = split_path(atom);
    if path.iter().any(String::is_empty) {
        return Err(Error::UnknownGroup(whole.to_string()));
    }
    let known = Level::ALL
        .iter()
        .map(|l| l.code().to_string())
        .chain(SEMANTIC_GROUPS.iter().map(|g| g.to_string()));
    let ok = known.into_iter().any(|g| path_has_prefix(&g, &path));
    if ok {
        Ok(path)
    } else {
        Err(Error::UnknownGroup(atom.trim().to_string()))
    }
}

/// Group paths of the semantic inventory.
pub const SEMANTIC_GROUPS: &[&str] = &[
    "DIA/Quality/Informality",
    "DIA/Quality/Diversity",
    "DIA/Quality/Subjectivity",
    "DIA/Sentiment",
    "DIA/Quantity",
    "DIA/Specificity/Cognitive",
    "DIA/Specificity/Perceptual",
    "CBA/Patterns",
    "CBA/Readability",
    "CBA/Sensationalism/Sentiment",
    "CBA/Sensationalism/Punctuation",
    "CBA/Sensationalism/Similarity",
    "CBA/NewsWorthiness/Quality",
    "CBA/NewsWorthiness/Informality",
];

/// One inventory row: a feature family and the column names it yields.
#[derive(Debug, Clone)]
pub struct InventoryRow {
    pub label: &'static str,
    pub group: &'static str,
    pub columns: Vec<String>,
}

fn count_pct(prefix: &str, items: &[&str]) -> Vec<(String, String)> {
    items
        .iter()
        .flat_map(|i| [(format!("{prefix}.{i}.n"), i.to_string()), (format!("{prefix}.{i}.pct"), i.to_string())])
        .collect()
}

/// The semantic-level inventory: 72 disinformation-related columns over the
/// body and 44 clickbait-related columns over the headline. Headline–body
/// similarity is stored once under sensationalism and aliased into
/// news-worthiness quality.
pub fn semantic_inventory() -> Vec<FeatureSpec> {
    let mut out = Vec::new();
    let mut push = |names: Vec<String>, level: Level, group: &str, side: Side, also: &[&str]| {
        for name in names {
            out.push(FeatureSpec {
                name,
                level,
                group: group.to_string(),
                also_in: also.iter().map(|s| s.to_string()).collect(),
                side,
            });
        }
    };
    let names = |v: Vec<(String, String)>| v.into_iter().map(|(n, _)| n).collect::<Vec<_>>();
    let plain = |prefix: &str, items: &[&str]| items.iter().map(|i| format!("{prefix}.{i}")).collect::<Vec<_>>();
    let dia = Level::SemanticDia;
    let cba = Level::SemanticCba;
    let informal = ["swear", "netspeak", "assent", "nonfluency", "filler", "overall"];

    push(names(count_pct("dia.informality", &informal)), dia, "DIA/Quality/Informality", Side::Body, &[]);
    push(
        names(count_pct(
            "dia.diversity",
            &["unique_words", "unique_content_words", "unique_nouns", "unique_verbs", "unique_adjectives", "unique_adverbs"],
        )),
        dia,
        "DIA/Quality/Diversity",
        Side::Body,
        &[],
    );
    push(
        names(count_pct("dia.subjectivity", &["biased", "report_verbs", "factive_verbs"])),
        dia,
        "DIA/Quality/Subjectivity",
        Side::Body,
        &[],
    );
    let mut sentiment = names(count_pct(
        "dia.sentiment",
        &["positive", "negative", "anxiety", "anger", "sadness", "emotional"],
    ));
    sentiment.push("dia.sentiment.polarity".into());
    push(sentiment, dia, "DIA/Sentiment", Side::Body, &[]);
    push(
        plain(
            "dia.quantity",
            &["characters", "words", "sentences", "paragraphs", "chars_per_word", "words_per_sentence", "sentences_per_paragraph"],
        ),
        dia,
        "DIA/Quantity",
        Side::Body,
        &[],
    );
    push(
        names(count_pct(
            "dia.cognitive",
            &["insight", "causation", "discrepancy", "tentative", "certainty", "differentiation", "overall"],
        )),
        dia,
        "DIA/Specificity/Cognitive",
        Side::Body,
        &[],
    );
    push(
        names(count_pct("dia.perceptual", &["see", "hear", "feel", "overall"])),
        dia,
        "DIA/Specificity/Perceptual",
        Side::Body,
        &[],
    );

    push(plain("cba.clickbait", &["phrases", "expressions", "overall"]), cba, "CBA/Patterns", Side::Headline, &[]);
    push(
        plain(
            "cba.readability",
            &["fre", "fkgl", "ari", "gfi", "cli", "words", "syllables", "polysyllables", "characters", "long_words"],
        ),
        cba,
        "CBA/Readability",
        Side::Headline,
        &[],
    );
    let mut cba_sent = names(count_pct("cba.sentiment", &["positive", "negative", "emotional"]));
    cba_sent.push("cba.sentiment.polarity".into());
    push(cba_sent, cba, "CBA/Sensationalism/Sentiment", Side::Headline, &[]);
    push(
        plain("cba.punctuation", &["exclamation", "question", "ellipsis", "overall"]),
        cba,
        "CBA/Sensationalism/Punctuation",
        Side::Headline,
        &[],
    );
    push(
        plain("cba.similarity", &["word2vec", "sentence2vec"]),
        cba,
        "CBA/Sensationalism/Similarity",
        Side::HeadlineAndBody,
        &["CBA/NewsWorthiness/Quality"],
    );
    push(
        names(count_pct("cba.newsworthiness", &["content_words", "function_words", "stop_words"])),
        cba,
        "CBA/NewsWorthiness/Quality",
        Side::Headline,
        &[],
    );
    push(names(count_pct("cba.informality", &informal)), cba, "CBA/NewsWorthiness/Informality", Side::Headline, &[]);
    out
}

/// Cached [`semantic_inventory`].
pub fn inventory() -> &'static [FeatureSpec] {
    static INVENTORY: OnceLock<Vec<FeatureSpec>> = OnceLock::new();
    INVENTORY.get_or_init(semantic_inventory)
}

pub const SEMANTIC_LEN: usize = 116;
pub const DIA_LEN: usize = 72;
pub const CBA_LEN: usize = 44;

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> FeatureSchema {
        let mut f = vec![
            FeatureSpec { name: "bow:a".into(), level: Level::Lexicon, group: "BOW".into(), also_in: vec![], side: Side::Content },
            FeatureSpec { name: "pos:NN".into(), level: Level::ShallowSyntax, group: "POS".into(), also_in: vec![], side: Side::Content },
            FeatureSpec { name: "cfg:x".into(), level: Level::DeepSyntax, group: "CFG".into(), also_in: vec![], side: Side::Content },
            FeatureSpec { name: "rr:elab".into(), level: Level::Discourse, group: "RR".into(), also_in: vec![], side: Side::Body },
        ];
        f.extend(semantic_inventory());
        FeatureSchema::new(f).unwrap()
    }

    #[test]
    fn inventory_sizes() {
        let inv = semantic_inventory();
        assert_eq!(inv.len(), SEMANTIC_LEN);
        assert_eq!(inv.iter().filter(|f| f.level == Level::SemanticDia).count(), DIA_LEN);
        assert_eq!(inv.iter().filter(|f| f.level == Level::SemanticCba).count(), CBA_LEN);
        assert!(FeatureSchema::new(inv).is_ok());
    }

    #[test]
    fn group_expressions() {
        let s = schema();
        assert_eq!(s.select(&GroupExpr::parse("BOW").unwrap()), vec![0]);
        let all_rr = s.select(&GroupExpr::parse("All-RR").unwrap());
        assert_eq!(all_rr.len(), s.len() - 1);
        assert!(!all_rr.contains(&3));
        assert_eq!(s.select(&GroupExpr::parse("Overall").unwrap()).len(), s.len());
        assert_eq!(s.select(&GroupExpr::parse("DIA+CBA").unwrap()).len(), 116);
        assert_eq!(s.select(&GroupExpr::parse("All-POS-CFG").unwrap()).len(), s.len() - 2);
        assert_eq!(s.select(&GroupExpr::parse("DIA/Quality").unwrap()).len(), 30);
        assert_eq!(s.select(&GroupExpr::parse("DIA/Specificity/Cognitive Process").unwrap()).len(), 14);
        assert_eq!(s.select(&GroupExpr::parse("CBA/NewsWorthiness").unwrap()).len(), 20);
        assert_eq!(s.select(&GroupExpr::parse("CBA/Sensationalism").unwrap()).len(), 13);
        assert_eq!(s.select(&GroupExpr::parse("CBA/Readability").unwrap()).len(), 10);
        match GroupExpr::parse("XYZ") {
            Err(Error::UnknownGroup(g)) => assert_eq!(g, "XYZ"),
            other => panic!("{other:?}"),
        }
        assert!(GroupExpr::parse("BOW+").is_err());
    }

    #[test]
    fn headline_mask_drops_body_columns() {
        let s = schema();
        let cols = s.headline_side_columns();
        assert!(cols.iter().all(|&i| s.features[i].level != Level::SemanticDia && s.features[i].level != Level::Discourse));
        assert!(cols.iter().all(|&i| !s.features[i].name.starts_with("cba.similarity")));
        assert_eq!(cols.len(), 3 + 42);
    }

    #[test]
    fn hash_changes_with_names() {
        let a = schema();
        let mut b = a.clone();
        b.features[0].name = "bow:b".into();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), schema().hash());
    }
}
