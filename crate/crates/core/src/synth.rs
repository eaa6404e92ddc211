//! Deterministic synthetic corpus with parse-tree and discourse sidecars and
//! word vectors.
//!
//! Every article draws five independent style flags, each agreeing with its
//! label with probability `agreement`:
//!
//! * lexicon: topic nouns and verbs (BOW, lexical CFG rules);
//! * syntax: template family, with shared closed-class words and a
//!   noun/verb-ambiguous filler tagged differently per family (POS, CFG);
//! * dia: affect and certainty adjectives/adverbs drawn from wide pools, and
//!   sentences per paragraph (DIA);
//! * cba: clickbait or plain headline (CBA); headline-like quotes appear in
//!   bodies of both classes so headline words alone are weak evidence;
//! * discourse: RST relation mix (RR).
//!
//! Single levels therefore see one or two flags and classify imperfectly,
//! while their union sees all five.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{stable_hash, Corpus, Label, NewsArticle};
use crate::discourse::{Nuclearity, RstNode};
use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::treebank::{parse_bracketed, ConstituencyTree, ParseSidecar, SentenceLocator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_fake: usize,
    pub n_true: usize,
    pub seed: u64,
    /// Probability that a level's style agrees with the article's class.
    pub agreement: f64,
    pub vector_dim: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_fake: 100,
            n_true: 100,
            seed: 2020,
            agreement: 0.85,
            vector_dim: 16,
        }
    }
}

pub struct SynthBundle {
    pub corpus: Corpus,
    pub trees: ParseSidecar,
    pub rst: HashMap<String, RstNode>,
    pub embeddings: EmbeddingModel,
}

/// File names used by [`write_bundle`].
pub struct BundlePaths {
    pub corpus: PathBuf,
    pub trees: PathBuf,
    pub rst: PathBuf,
    pub vectors: PathBuf,
}

impl BundlePaths {
    pub fn in_dir(dir: &Path) -> BundlePaths {
        BundlePaths {
            corpus: dir.join("corpus.jsonl"),
            trees: dir.join("corpus.trees.tsv"),
            rst: dir.join("corpus.rst.txt"),
            vectors: dir.join("vectors.txt"),
        }
    }
}

// Topic words carry the lexicon-level signal.
const FAKE_NOUNS: &[&str] = &["elite", "hoax", "cabal", "agenda", "insider", "globalist", "coverup", "puppet"];
const TRUE_NOUNS: &[&str] = &["committee", "budget", "ministry", "survey", "agency", "council", "audit", "economy"];
const NEUTRAL_NOUNS: &[&str] = &["city", "country", "week", "people", "school", "market", "family", "water"];
const FAKE_VERBS: &[&str] = &["exposed", "leaked", "slammed", "smeared", "rigged", "hid"];
const TRUE_VERBS: &[&str] = &["announced", "approved", "published", "reviewed", "estimated", "noted"];
const NEUTRAL_VERBS: &[&str] = &["changed", "opened", "reached", "moved", "started", "joined"];
// Noun/verb-ambiguous fillers: tagged NN in one template family, VB in the
// other, so the syntax signal is invisible to bag-of-words.
const AMBIGUOUS: &[&str] = &["claim", "report", "plan", "change", "call", "cut", "deal", "review", "block", "answer"];
// Affect and certainty vocabulary carries the disinformation-attribute
// signal, spread over many words so no single word is decisive.
const FAKE_ADJ: &[&str] = &[
    "terrible", "horrible", "dangerous", "corrupt", "worst", "angry", "furious", "hostile", "afraid", "nervous",
    "scared", "sad", "tragic", "lonely", "crooked", "outrageous", "ridiculous", "shameful", "mad", "bad",
    "wrong", "fake", "disgraceful", "radical", "annoyed", "worried", "anxious", "terrified", "uncertain", "lost",
    "hurt", "damned", "crappy", "bloody", "freaking", "screwed", "worse", "failed", "hated", "attacked",
];
const TRUE_ADJ: &[&str] = &[
    "new", "local", "annual", "public", "regional", "federal", "early", "quarterly", "national", "municipal",
    "current", "recent", "formal", "previous", "initial", "official", "monthly", "weekly", "central", "total",
    "additional", "average", "domestic", "external", "internal", "joint", "legal", "main", "minor", "modern",
    "northern", "southern", "eastern", "western", "rural", "urban", "general", "standard", "technical", "usual",
];
const FAKE_ADV: &[&str] = &[
    "definitely", "certainly", "clearly", "truly", "totally", "literally", "honestly", "seriously", "basically",
    "actually", "undoubtedly", "absolutely", "always", "never", "anyway", "whatever", "indeed", "sure", "gonna",
    "kinda",
];
const TRUE_ADV: &[&str] = &[
    "reportedly", "probably", "perhaps", "possibly", "recently", "later", "somewhat", "allegedly", "initially",
    "formally", "partly", "mostly", "slightly", "earlier", "annually", "gradually", "largely", "nearly", "roughly",
    "previously",
];
const NAMES: &[&str] = &["Smith", "Garcia", "Lee", "Patel", "Brown", "Kim", "Nguyen", "Lopez"];
const MONTHS: &[&str] = &["January", "March", "May", "July", "September", "November"];
const SENSATIONAL: &[&str] = &["truth", "secret", "video", "photo", "moment", "reason"];

// Both families use the same closed-class words; they differ in structure
// and in how the ambiguous filler is tagged.
const TRUE_TEMPLATES: &[&str] = &[
    "(S (NP (DT the) (NN {N})) (VP (VBD {V}) (NP (NP (DT the) (NN {M})) (PP (IN of) (NP (DT the) (NN {N})))) (PP (TO to) (NP (NNP {NAME})))) (. .))",
    "(S (NP (NP (DT the) (NN {M})) (PP (IN of) (NP (DT the) (JJ {A}) (NN {N})))) (VP (VBD {V}) (PP (TO to) (NP (DT the) (NN {N})))) (. .))",
    "(S (NP (DT the) (JJ {A}) (NN {N})) (ADVP (RB {R})) (VP (VBD {V}) (NP (DT the) (NN {M})) (PP (TO to) (NP (DT the) (NN {N}))) (PP (IN in) (NP (NNP {MONTH})))) (. .))",
];
const FAKE_TEMPLATES: &[&str] = &[
    "(S (NP (DT the) (NN {N})) (VP (VBD {V}) (S (VP (TO to) (VP (VB {M}) (NP (NP (DT the) (NN {N})) (PP (IN of) (NP (NNP {NAME})))))))) (. .))",
    "(SQ (VBD {V}) (NP (DT the) (NN {N})) (S (VP (TO to) (VP (VB {M}) (NP (NP (DT the) (NN {N})) (PP (IN of) (NP (DT the) (JJ {A}) (NN {N}))))))) (. ?))",
    "(S (PP (IN in) (NP (NNP {MONTH}))) (, ,) (NP (DT the) (JJ {A}) (NN {N})) (ADVP (RB {R})) (VP (VBD {V}) (S (VP (TO to) (VP (VB {M}) (NP (DT the) (NN {N})))))) (. !))",
];
const FAKE_HEADLINES: &[&str] = &[
    "(S (NP (PRP You)) (VP (MD will) (ADVP (RB never)) (VP (VB believe) (SBAR (WHNP (WP what)) (S (NP (DT this) (NN {HN})) (VP (VBD {V})))))) (. !))",
    "(NP (NP (CD {CD}) (NNS reasons)) (SBAR (WHADVP (WRB why)) (S (NP (DT the) (NN {HN})) (VP (VBZ is) (ADJP (JJ {A}))))) (: ...))",
    "(S (NP (DT This) (NN {HN})) (VP (MD will) (VP (VB blow) (NP (PRP$ your) (NN mind)))) (. !))",
    "(S (NP (DT This) (NN {HN})) (VP (VBZ is) (VP (VBG going) (ADJP (JJ viral)))) (. !))",
];
const TRUE_HEADLINES: &[&str] = &[
    "(S (NP (NN {BN})) (VP (VBZ reports) (NP (CD {CD}) (NN percent) (NN rise))))",
    "(S (NP (NNS Officials)) (VP (VBD {V}) (NP (JJ {A}) (NN {BN}))))",
    "(NP (NP (DT The) (NN {BN})) (PP (IN in) (NP (NNP {MONTH}))))",
];

const FAKE_RELATIONS: &[&str] = &[
    "attribution", "condition", "evaluation", "antithesis", "cause", "concession", "enablement", "explanation",
];
const TRUE_RELATIONS: &[&str] = &[
    "elaboration", "background", "temporal", "same_unit", "comparison", "summary", "manner_means", "topic_comment",
];
const SHARED_RELATIONS: &[&str] = &["joint", "contrast"];

/// Per-level style of one article: `true` means fake-like.
struct Styles {
    lexicon: bool,
    syntax: bool,
    dia: bool,
    cba: bool,
    discourse: bool,
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

struct Filler<'r> {
    rng: &'r mut ChaCha8Rng,
    styles: &'r Styles,
    body_nouns: Vec<String>,
}

impl Filler<'_> {
    fn styled(&mut self, flag: bool, fake: &[&'static str], real: &[&'static str], neutral: &[&'static str]) -> String {
        let own = if flag { fake } else { real };
        let pool = if self.rng.gen_bool(0.8) { own } else { neutral };
        pick(self.rng, pool).to_string()
    }

    fn affect(&mut self, fake: &[&'static str], real: &[&'static str]) -> String {
        let pool = if self.styles.dia ^ self.rng.gen_bool(0.1) { fake } else { real };
        pick(self.rng, pool).to_string()
    }

    fn fill(&mut self, template: &str, record_nouns: bool) -> String {
        let mut out = String::new();
        let mut rest = template;
        while let Some(start) = rest.find('{') {
            out.push_str(&rest[..start]);
            let end = rest[start..].find('}').expect("closed slot") + start;
            let slot = &rest[start + 1..end];
            let word = match slot {
                "N" => {
                    let n = self.styled(self.styles.lexicon, FAKE_NOUNS, TRUE_NOUNS, NEUTRAL_NOUNS);
                    if record_nouns {
                        self.body_nouns.push(n.clone());
                    }
                    n
                }
                "BN" => match self.body_nouns.as_slice() {
                    [] => pick(self.rng, NEUTRAL_NOUNS).to_string(),
                    nouns => nouns[self.rng.gen_range(0..nouns.len())].clone(),
                },
                "HN" => pick(self.rng, SENSATIONAL).to_string(),
                "V" => self.styled(self.styles.lexicon, FAKE_VERBS, TRUE_VERBS, NEUTRAL_VERBS),
                "M" => pick(self.rng, AMBIGUOUS).to_string(),
                "A" => self.affect(FAKE_ADJ, TRUE_ADJ),
                "R" => self.affect(FAKE_ADV, TRUE_ADV),
                "CD" => self.rng.gen_range(2..40).to_string(),
                "NAME" => pick(self.rng, NAMES).to_string(),
                "MONTH" => pick(self.rng, MONTHS).to_string(),
                other => panic!("unknown slot {other}"),
            };
            out.push_str(&word);
            rest = &rest[end + 1..];
        }
        out.push_str(rest);
        out
    }
}

/// Surface text of a tree: leaves joined by spaces, punctuation attached,
/// first letter capitalized.
pub fn surface(tree: &ConstituencyTree) -> String {
    let mut out = String::new();
    for (_, token) in tree.leaves() {
        let attach = matches!(token, "." | "," | "!" | "?" | "..." | ":" | ";");
        if !out.is_empty() && !attach {
            out.push(' ');
        }
        out.push_str(token);
    }
    let mut chars = out.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => out,
    }
}

fn rst_tree(rng: &mut ChaCha8Rng, edus: &[String], fake: bool) -> RstNode {
    if edus.len() == 1 {
        return RstNode::leaf(edus[0].clone(), Nuclearity::Nucleus);
    }
    let cut = rng.gen_range(1..edus.len());
    let mut left = rst_tree(rng, &edus[..cut], fake);
    let mut right = rst_tree(rng, &edus[cut..], fake);
    let (own, other) = if fake {
        (FAKE_RELATIONS, TRUE_RELATIONS)
    } else {
        (TRUE_RELATIONS, FAKE_RELATIONS)
    };
    let u: f64 = rng.gen();
    let relation = if u < 0.6 {
        pick(rng, own)
    } else if u < 0.75 {
        pick(rng, other)
    } else {
        pick(rng, SHARED_RELATIONS)
    };
    let multinuclear = matches!(relation, "joint" | "contrast" | "same_unit");
    left.nuclearity = Nuclearity::Nucleus;
    right.nuclearity = Nuclearity::Nucleus;
    if !multinuclear {
        if rng.gen_bool(0.5) {
            right.nuclearity = Nuclearity::Satellite;
        } else {
            left.nuclearity = Nuclearity::Satellite;
        }
    }
    RstNode {
        relation: relation.to_string(),
        nuclearity: Nuclearity::Nucleus,
        children: vec![left, right],
        text_span: None,
    }
}

fn article(id: &str, label: Label, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> (NewsArticle, Vec<(SentenceLocator, ConstituencyTree)>, RstNode) {
    let fake = label == Label::Fake;
    let mut style = || if rng.gen_bool(cfg.agreement) { fake } else { !fake };
    let styles = Styles {
        lexicon: style(),
        syntax: style(),
        dia: style(),
        cba: style(),
        discourse: style(),
    };
    let mut filler = Filler {
        rng,
        styles: &styles,
        body_nouns: Vec::new(),
    };
    let n_paragraphs = filler.rng.gen_range(3..=6);
    let mut body: Vec<Vec<ConstituencyTree>> = Vec::new();
    for _ in 0..n_paragraphs {
        let n_sentences = if styles.dia {
            filler.rng.gen_range(3..=5)
        } else {
            filler.rng.gen_range(2..=3)
        };
        let sentences = (0..n_sentences)
            .map(|_| {
                let family = if styles.syntax ^ filler.rng.gen_bool(0.1) {
                    FAKE_TEMPLATES
                } else {
                    TRUE_TEMPLATES
                };
                let template = family[filler.rng.gen_range(0..family.len())];
                parse_bracketed(&filler.fill(template, true)).expect("valid template")
            })
            .collect();
        body.push(sentences);
    }
    // Headline-like quotes in the body, independent of the class, so headline
    // vocabulary alone does not reveal the clickbait style.
    for pool in [FAKE_HEADLINES, TRUE_HEADLINES] {
        if filler.rng.gen_bool(0.5) {
            let template = pool[filler.rng.gen_range(0..pool.len())];
            let tree = parse_bracketed(&filler.fill(template, false)).expect("valid template");
            let p = filler.rng.gen_range(0..body.len());
            let s = filler.rng.gen_range(0..=body[p].len());
            body[p].insert(s, tree);
        }
    }
    let headlines = if styles.cba { FAKE_HEADLINES } else { TRUE_HEADLINES };
    let template = headlines[filler.rng.gen_range(0..headlines.len())];
    let head_tree = parse_bracketed(&filler.fill(template, false)).expect("valid template");
    let headline = surface(&head_tree);

    let mut parses = vec![(
        SentenceLocator {
            paragraph: Some(0),
            sentence: 0,
        },
        head_tree,
    )];
    let mut paragraphs = Vec::new();
    let mut edus = Vec::new();
    for (p, sentences) in body.into_iter().enumerate() {
        let texts: Vec<String> = sentences.iter().map(surface).collect();
        edus.extend(texts.iter().cloned());
        paragraphs.push(texts.join(" "));
        for (s, tree) in sentences.into_iter().enumerate() {
            parses.push((
                SentenceLocator {
                    paragraph: Some(p + 1),
                    sentence: s,
                },
                tree,
            ));
        }
    }
    let rst = rst_tree(filler.rng, &edus, styles.discourse);
    let score = if styles.cba {
        filler.rng.gen_range(0.45..1.0)
    } else {
        filler.rng.gen_range(0.0..0.55)
    };
    let mut a = NewsArticle::new(id, headline, paragraphs.join("\n\n")).with_label(label);
    a.source = Some("synthetic".into());
    a.clickbait_score = Some(score);
    (a, parses, rst)
}

/// Random vectors in [-1, 1]^dim, seeded per word so they do not depend on
/// vocabulary order.
pub fn word_vectors(words: &BTreeSet<String>, dim: usize, seed: u64) -> Result<EmbeddingModel> {
    let vectors = words
        .iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stable_hash(w));
            (w.clone(), (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        })
        .collect();
    EmbeddingModel::new(dim, vectors)
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthBundle> {
    if cfg.n_fake + cfg.n_true == 0 {
        return Err(Error::InvalidArgument("synthetic corpus needs at least one article".into()));
    }
    if !(0.0..=1.0).contains(&cfg.agreement) {
        return Err(Error::InvalidArgument(format!("agreement {} outside [0, 1]", cfg.agreement)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Fake, cfg.n_fake)
        .chain(std::iter::repeat_n(Label::True, cfg.n_true))
        .collect();
    labels.shuffle(&mut rng);
    let mut articles = Vec::new();
    let mut trees = ParseSidecar::default();
    let mut rst = HashMap::new();
    let mut vocab = BTreeSet::new();
    for (i, label) in labels.into_iter().enumerate() {
        let id = format!("syn{:04}", i + 1);
        let (a, parses, r) = article(&id, label, cfg, &mut rng);
        for (loc, t) in parses {
            vocab.extend(t.leaves().into_iter().map(|(_, w)| w.to_lowercase()));
            trees.insert(id.clone(), loc, t);
        }
        rst.insert(id, r);
        articles.push(a);
    }
    vocab.retain(|w| w.chars().any(char::is_alphanumeric));
    Ok(SynthBundle {
        corpus: Corpus::new("synthetic", articles)?,
        trees,
        rst,
        embeddings: word_vectors(&vocab, cfg.vector_dim, cfg.seed)?,
    })
}

pub fn write_bundle(bundle: &SynthBundle, dir: &Path) -> Result<BundlePaths> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = BundlePaths::in_dir(dir);
    bundle.corpus.write_jsonl(&paths.corpus)?;
    fs::write(&paths.trees, bundle.trees.to_tsv()).map_err(|e| Error::io(&paths.trees, e))?;
    let mut ids: Vec<&String> = bundle.rst.keys().collect();
    ids.sort();
    let rst: String = ids
        .into_iter()
        .map(|id| format!("{id}\t{}\n", bundle.rst[id].to_bracketed()))
        .collect();
    fs::write(&paths.rst, rst).map_err(|e| Error::io(&paths.rst, e))?;
    bundle.embeddings.write_text(&paths.vectors)?;
    Ok(paths)
}
